use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::ImmersionSpec;
use crate::error::{GeomError, GeomResult};
use crate::expr::Jet2;
use crate::tol;

/// Tangent and normal frames of the immersion at one chart point.
#[derive(Clone, Debug)]
pub struct Frame {
    pub point: Vec<f64>,
    /// n × k, columns ∂χ/∂uᵢ.
    pub jacobian: DMatrix<f64>,
    /// Induced metric gᵢⱼ = ⟨∂ᵢχ, ∂ⱼχ⟩.
    pub gram: DMatrix<f64>,
    pub gram_inv: DMatrix<f64>,
    /// n × (n - k) orthonormal basis of the normal space.
    pub normal: DMatrix<f64>,
    pub gram_cond: f64,
}

impl Frame {
    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn ambient_dim(&self) -> usize {
        self.jacobian.nrows()
    }

    pub fn codim(&self) -> usize {
        self.normal.ncols()
    }

    /// g(x, y) for tangent coefficient vectors.
    pub fn g(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (x.transpose() * &self.gram * y)[(0, 0)]
    }

    pub fn norm(&self, x: &DVector<f64>) -> f64 {
        self.g(x, x).max(0.0).sqrt()
    }

    /// Ambient vector J·x.
    pub fn push(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.jacobian * x
    }

    /// Tangent coefficients of the orthogonal projection of an ambient vector.
    pub fn tangent_coeffs(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.gram_inv * (self.jacobian.transpose() * v)
    }

    /// Normal-basis coefficients of an ambient vector.
    pub fn normal_coeffs(&self, v: &DVector<f64>) -> DVector<f64> {
        self.normal.transpose() * v
    }

    /// Ambient vector of normal-basis coefficients.
    pub fn normal_vector(&self, n: &DVector<f64>) -> DVector<f64> {
        &self.normal * n
    }

    /// Solves `gram · y = rhs`.
    pub fn raise(&self, rhs: &DVector<f64>) -> DVector<f64> {
        &self.gram_inv * rhs
    }

    /// max |Jᵀ N| and max |NᵀN - I|.
    pub fn orthonormality_residuals(&self) -> (f64, f64) {
        let jt_n = self.jacobian.transpose() * &self.normal;
        let m = self.codim();
        let nt_n = self.normal.transpose() * &self.normal - DMatrix::<f64>::identity(m, m);
        (max_abs(&jt_n), max_abs(&nt_n))
    }
}

pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Second derivatives ∂²χ/∂uᵢ∂uⱼ as ambient vectors, stored symmetrically.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondDerivatives {
    k: usize,
    entries: Vec<DVector<f64>>,
}

impl SecondDerivatives {
    pub fn get(&self, i: usize, j: usize) -> &DVector<f64> {
        &self.entries[i * self.k + j]
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    /// Σ xᵢ yⱼ ∂²χ/∂uᵢ∂uⱼ.
    pub fn contract(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let n = self.entries[0].len();
        let mut out = DVector::zeros(n);
        for i in 0..self.k {
            for j in 0..self.k {
                let c = x[i] * y[j];
                if c != 0.0 {
                    out += self.get(i, j) * c;
                }
            }
        }
        out
    }
}

/// Frame plus second derivatives from a single jet evaluation.
#[derive(Clone, Debug)]
pub struct PointGeometry {
    pub frame: Frame,
    pub second: SecondDerivatives,
}

fn map_jets(spec: &ImmersionSpec, point: &[f64]) -> GeomResult<Vec<Jet2>> {
    spec.components
        .iter()
        .enumerate()
        .map(|(a, c)| {
            c.eval_jet2(point).map_err(|source| GeomError::Eval {
                what: format!("map component {}", a + 1),
                point: point.to_vec(),
                source,
            })
        })
        .collect()
}

fn second_from_jets(jets: &[Jet2], k: usize) -> SecondDerivatives {
    let n = jets.len();
    let mut entries = vec![DVector::zeros(n); k * k];
    for i in 0..k {
        for j in i..k {
            let v = DVector::from_iterator(n, jets.iter().map(|jet| jet.hess[(i, j)]));
            entries[j * k + i] = v.clone();
            entries[i * k + j] = v;
        }
    }
    SecondDerivatives { k, entries }
}

fn frame_from_jets(jets: &[Jet2], point: &[f64]) -> GeomResult<Frame> {
    let n = jets.len();
    let k = point.len();
    let jacobian = DMatrix::from_fn(n, k, |a, i| jets[a].grad[i]);
    let gram = jacobian.transpose() * &jacobian;
    let gram = (&gram + gram.transpose()) * 0.5;

    let eig = SymmetricEigen::new(gram.clone());
    let lmin = eig.eigenvalues.min();
    let lmax = eig.eigenvalues.max();
    let gram_cond = if lmin > 0.0 { lmax / lmin } else { f64::INFINITY };
    if !(gram_cond <= tol::GRAM_CONDITION) {
        return Err(GeomError::SingularPoint {
            point: point.to_vec(),
            condition: gram_cond,
        });
    }
    let gram_inv = gram
        .clone()
        .cholesky()
        .ok_or_else(|| GeomError::SingularPoint {
            point: point.to_vec(),
            condition: gram_cond,
        })?
        .inverse();
    let gram_inv = (&gram_inv + gram_inv.transpose()) * 0.5;

    let normal = normal_completion(&jacobian);
    Ok(Frame {
        point: point.to_vec(),
        jacobian,
        gram,
        gram_inv,
        normal,
        gram_cond,
    })
}

/// Orthonormal completion of the column space of `jacobian`: the columns are
/// orthonormalised first, then standard basis vectors are added greedily,
/// always taking the one with the largest residual. The tangent part is
/// discarded.
fn normal_completion(jacobian: &DMatrix<f64>) -> DMatrix<f64> {
    let n = jacobian.nrows();
    let k = jacobian.ncols();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n);

    let orthogonalize = |v: &mut DVector<f64>, basis: &[DVector<f64>]| {
        for _ in 0..2 {
            for q in basis {
                let c = q.dot(v);
                v.axpy(-c, q, 1.0);
            }
        }
    };

    for i in 0..k {
        let mut v = jacobian.column(i).clone_owned();
        orthogonalize(&mut v, &basis);
        let norm = v.norm();
        basis.push(v / norm);
    }

    let mut used = vec![false; n];
    while basis.len() < n {
        let mut best: Option<(usize, DVector<f64>, f64)> = None;
        for (e, taken) in used.iter().enumerate() {
            if *taken {
                continue;
            }
            let mut v = DVector::from_fn(n, |r, _| if r == e { 1.0 } else { 0.0 });
            orthogonalize(&mut v, &basis);
            let norm = v.norm();
            if best.as_ref().is_none_or(|(_, _, b)| norm > *b) {
                best = Some((e, v, norm));
            }
        }
        let (e, v, norm) = best.expect("fewer than n vectors chosen");
        used[e] = true;
        basis.push(v / norm);
    }
    DMatrix::from_columns(&basis[k..])
}

pub fn frame_at(spec: &ImmersionSpec, point: &[f64]) -> GeomResult<Frame> {
    let jets = map_jets(spec, point)?;
    frame_from_jets(&jets, point)
}

pub fn second_derivatives_at(spec: &ImmersionSpec, point: &[f64]) -> GeomResult<SecondDerivatives> {
    let jets = map_jets(spec, point)?;
    Ok(second_from_jets(&jets, point.len()))
}

pub fn geometry_at(spec: &ImmersionSpec, point: &[f64]) -> GeomResult<PointGeometry> {
    let jets = map_jets(spec, point)?;
    Ok(PointGeometry {
        frame: frame_from_jets(&jets, point)?,
        second: second_from_jets(&jets, point.len()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersion::load_spec;

    const EX61: &str = "\
ambient 4 signature + + - -
chart u v w
domain u 0.5 2.0 ; v 0 6.283185 ; w 0.5 2.0
map w*u*cos(v) , w*u*sin(v) , w*cos(v) , w*sin(v)
dist D1 = du , dw
dist D2 = dv
";

    #[test]
    fn tangent_columns_of_four_dimensional_example() {
        let spec = load_spec(EX61).unwrap();
        let f = frame_at(&spec, &[1.0, 0.0, 1.0]).unwrap();
        let cols: Vec<Vec<f64>> = (0..3).map(|i| f.jacobian.column(i).iter().copied().collect()).collect();
        assert_eq!(cols[0], vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(cols[1], vec![-0.0, 1.0, -0.0, 1.0]);
        assert_eq!(cols[2], vec![1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn gram_has_cross_term() {
        // dot products of (1,0,0,0), (0,1,0,1), (1,0,1,0)
        let spec = load_spec(EX61).unwrap();
        let f = frame_at(&spec, &[1.0, 0.0, 1.0]).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 1.0, 0.0, 2.0, 0.0, 1.0, 0.0, 2.0]);
        assert_eq!(f.gram, expected);
    }

    #[test]
    fn normal_basis_is_orthonormal_complement() {
        let spec = load_spec(EX61).unwrap();
        let f = frame_at(&spec, &[1.3, 0.4, 0.8]).unwrap();
        let (jt_n, nt_n) = f.orthonormality_residuals();
        assert!(jt_n < tol::FRAME);
        assert!(nt_n < tol::FRAME);
        assert_eq!(f.codim(), 1);
    }

    #[test]
    fn coinciding_columns_are_singular() {
        let text = "\
ambient 3 signature + - +
chart u v
domain u 0 1 ; v 0 1
map u + v , u + v , 0
";
        let spec = load_spec(text).unwrap();
        let err = frame_at(&spec, &[0.5, 0.5]).unwrap_err();
        assert!(matches!(err, GeomError::SingularPoint { .. }));
    }

    #[test]
    fn mixed_second_derivative() {
        // ∂²/∂u∂w of (wu cos v, wu sin v, w cos v, w sin v) = (cos v, sin v, 0, 0)
        let spec = load_spec(EX61).unwrap();
        let h = second_derivatives_at(&spec, &[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(h.get(0, 2).as_slice(), &[1.0, 0.0, 0.0, 0.0]);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(h.get(i, j), h.get(j, i));
            }
        }
    }

    #[test]
    fn affine_map_has_zero_second_derivatives() {
        let text = "\
ambient 4 signature + + - -
chart u v
domain u 0 1 ; v 0 1
map u , v , u - 2*v , 3
";
        let spec = load_spec(text).unwrap();
        let h = second_derivatives_at(&spec, &[0.3, 0.7]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(h.get(i, j).iter().all(|x| *x == 0.0));
            }
        }
    }
}
