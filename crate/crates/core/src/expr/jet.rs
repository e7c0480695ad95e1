//! Second-order forward-mode jets.
//!
//! A [`Jet2`] carries a value together with its gradient and Hessian with
//! respect to the chart coordinates. Every operation fills the upper triangle
//! of the Hessian and mirrors it, so the Hessian is symmetric bit for bit.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

impl Jet2 {
    pub fn constant(dim: usize, value: f64) -> Self {
        Self {
            value,
            grad: DVector::zeros(dim),
            hess: DMatrix::zeros(dim, dim),
        }
    }

    /// The coordinate function `u_index` evaluated at `value`.
    pub fn variable(dim: usize, index: usize, value: f64) -> Self {
        let mut jet = Self::constant(dim, value);
        jet.grad[index] = 1.0;
        jet
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    fn from_upper(value: f64, grad: DVector<f64>, mut entry: impl FnMut(usize, usize) -> f64) -> Self {
        let k = grad.len();
        let mut hess = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let h = entry(i, j);
                hess[(i, j)] = h;
                hess[(j, i)] = h;
            }
        }
        Self { value, grad, hess }
    }

    /// Applies a scalar function given its value and first two derivatives at
    /// `self.value`.
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let grad = &self.grad * f1;
        Self::from_upper(f0, grad, |i, j| {
            f1 * self.hess[(i, j)] + f2 * (self.grad[i] * self.grad[j])
        })
    }

    pub fn neg(&self) -> Self {
        self.chain(-self.value, -1.0, 0.0)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_upper(self.value + other.value, &self.grad + &other.grad, |i, j| {
            self.hess[(i, j)] + other.hess[(i, j)]
        })
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_upper(self.value - other.value, &self.grad - &other.grad, |i, j| {
            self.hess[(i, j)] - other.hess[(i, j)]
        })
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = (self, other);
        let grad = &a.grad * b.value + &b.grad * a.value;
        Self::from_upper(a.value * b.value, grad, |i, j| {
            a.value * b.hess[(i, j)]
                + b.value * a.hess[(i, j)]
                + (a.grad[i] * b.grad[j] + b.grad[i] * a.grad[j])
        })
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.chain(self.value * factor, factor, 0.0)
    }

    /// Reciprocal; the caller guarantees `self.value != 0`.
    pub fn recip(&self) -> Self {
        let x = self.value;
        self.chain(1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_on_bilinear() {
        let u = Jet2::variable(2, 0, 2.0);
        let v = Jet2::variable(2, 1, 3.0);
        let p = u.mul(&v);
        assert_eq!(p.value, 6.0);
        assert_eq!(p.grad.as_slice(), &[3.0, 2.0]);
        assert_eq!(p.hess[(0, 1)], 1.0);
        assert_eq!(p.hess[(1, 0)], 1.0);
        assert_eq!(p.hess[(0, 0)], 0.0);
    }

    #[test]
    fn reciprocal_matches_hand_derivatives() {
        // 1/x at x = 2: -1/4, 2/8
        let x = Jet2::variable(1, 0, 2.0);
        let r = x.recip();
        assert_eq!(r.value, 0.5);
        assert_eq!(r.grad[0], -0.25);
        assert_eq!(r.hess[(0, 0)], 0.25);
    }
}
