//! Immersion specs, tangent frames and second derivatives.

mod frame;
mod sampling;
mod specfile;

use nalgebra::{DMatrix, DVector};

use crate::ambient::ProductStructure;
use crate::error::{GeomError, GeomResult};
use crate::expr::{EvalError, Expr};

pub use frame::{frame_at, geometry_at, second_derivatives_at, Frame, PointGeometry, SecondDerivatives};
pub use sampling::{sample_domain, SampleSet};
pub use specfile::{load_spec, SpecError, SpecErrorKind};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// A tangent field `Σ cᵢ(u) ∂/∂uᵢ`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentField {
    pub coeffs: Vec<Expr>,
    pub text: String,
}

/// Coefficients of a tangent field at a point together with their first
/// derivatives: `jacobian[(i, j)] = ∂ⱼ cᵢ`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldAt {
    pub coeffs: DVector<f64>,
    pub jacobian: DMatrix<f64>,
}

impl FieldAt {
    /// Constant-coefficient field.
    pub fn constant(coeffs: DVector<f64>) -> Self {
        let k = coeffs.len();
        Self {
            coeffs,
            jacobian: DMatrix::zeros(k, k),
        }
    }

    pub fn coordinate(k: usize, index: usize) -> Self {
        Self::constant(DVector::from_fn(k, |i, _| if i == index { 1.0 } else { 0.0 }))
    }

    pub fn sum(&self, other: &Self) -> Self {
        Self {
            coeffs: &self.coeffs + &other.coeffs,
            jacobian: &self.jacobian + &other.jacobian,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            coeffs: &self.coeffs * factor,
            jacobian: &self.jacobian * factor,
        }
    }

    /// Directional derivative of the coefficients along `x`.
    pub fn derivative_along(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.jacobian * x
    }
}

impl TangentField {
    pub fn eval(&self, point: &[f64]) -> Result<FieldAt, EvalError> {
        let k = point.len();
        let mut coeffs = DVector::zeros(k);
        let mut jacobian = DMatrix::zeros(k, k);
        for (i, c) in self.coeffs.iter().enumerate() {
            let jet = c.eval_jet2(point)?;
            coeffs[i] = jet.value;
            jacobian.set_row(i, &jet.grad.transpose());
        }
        Ok(FieldAt { coeffs, jacobian })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    pub name: String,
    pub fields: Vec<TangentField>,
}

impl Distribution {
    pub fn rank(&self) -> usize {
        self.fields.len()
    }

    pub fn eval(&self, point: &[f64]) -> GeomResult<Vec<FieldAt>> {
        self.fields
            .iter()
            .enumerate()
            .map(|(i, f)| {
                f.eval(point).map_err(|source| GeomError::Eval {
                    what: format!("field {}[{i}]", self.name),
                    point: point.to_vec(),
                    source,
                })
            })
            .collect()
    }

    /// Basis matrix (k × rank) at a point.
    pub fn basis(&self, point: &[f64]) -> GeomResult<DMatrix<f64>> {
        let fields = self.eval(point)?;
        let cols: Vec<_> = fields.into_iter().map(|f| f.coeffs).collect();
        Ok(DMatrix::from_columns(&cols))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlantClaim {
    pub distribution: String,
    /// Claimed slant angle θ as a function on the chart.
    pub angle: Expr,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WarpedClaim {
    pub base: String,
    pub fiber: String,
    pub warping: Expr,
    pub text: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Claims {
    pub slant: Vec<SlantClaim>,
    pub warped: Option<WarpedClaim>,
}

impl Claims {
    pub fn is_empty(&self) -> bool {
        self.slant.is_empty() && self.warped.is_none()
    }
}

/// Parsed spec file: chart, domain box, ambient structure, the map, the
/// declared distributions and any claims to verify.
#[derive(Clone, Debug, PartialEq)]
pub struct ImmersionSpec {
    pub chart: Vec<String>,
    pub domain: Vec<Interval>,
    pub ambient: ProductStructure,
    pub components: Vec<Expr>,
    pub distributions: Vec<Distribution>,
    pub claims: Claims,
    /// Explicit potential μ for the characterization suites.
    pub mu: Option<Expr>,
}

impl ImmersionSpec {
    /// Chart dimension k.
    pub fn dim(&self) -> usize {
        self.chart.len()
    }

    /// Ambient dimension n.
    pub fn ambient_dim(&self) -> usize {
        self.ambient.dim()
    }

    pub fn distribution_index(&self, name: &str) -> GeomResult<usize> {
        self.distributions
            .iter()
            .position(|d| d.name == name)
            .ok_or_else(|| GeomError::UnknownDistribution(name.to_string()))
    }

    pub fn distribution(&self, name: &str) -> GeomResult<&Distribution> {
        Ok(&self.distributions[self.distribution_index(name)?])
    }

    pub fn in_domain(&self, point: &[f64]) -> bool {
        point.len() == self.dim() && self.domain.iter().zip(point).all(|(iv, x)| iv.contains(*x))
    }

    /// Every expression a suite may evaluate, labelled for error messages.
    pub(crate) fn auxiliary_exprs(&self) -> Vec<(String, &Expr)> {
        let mut out = Vec::new();
        for d in &self.distributions {
            for (i, f) in d.fields.iter().enumerate() {
                for c in &f.coeffs {
                    out.push((format!("field {}[{i}]", d.name), c));
                }
            }
        }
        for c in &self.claims.slant {
            out.push((format!("slant claim for {}", c.distribution), &c.angle));
        }
        if let Some(w) = &self.claims.warped {
            out.push(("warping claim".to_string(), &w.warping));
        }
        if let Some(mu) = &self.mu {
            out.push(("mu".to_string(), mu));
        }
        out
    }
}
