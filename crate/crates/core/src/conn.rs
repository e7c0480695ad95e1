//! Induced connection, second fundamental form and shape operators.
//!
//! The ambient is flat, so `∂ᵢ∂ⱼχ` is the ambient covariant derivative of
//! the coordinate fields and a single tangent/normal split of the Hessian
//! gives both `∇` and `σ`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::check::{unit_floor, IdentityCheck, SuiteReport};
use crate::error::{GeomError, GeomResult};
use crate::immersion::{frame_at, geometry_at, FieldAt, Frame, ImmersionSpec, PointGeometry};
use crate::structops::probe_coefficients;
use crate::tol;

/// `christoffel[i][j]`: tangent coordinates of `∇_{∂ᵢ}∂ⱼ`.
/// `sigma[i][j]`: normal-basis coordinates of `σ(∂ᵢ, ∂ⱼ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondFundamental {
    k: usize,
    christoffel: Vec<DVector<f64>>,
    sigma: Vec<DVector<f64>>,
}

impl SecondFundamental {
    pub fn from_geometry(geom: &PointGeometry) -> Self {
        let k = geom.frame.dim();
        let mut christoffel = vec![DVector::zeros(k); k * k];
        let mut sigma = vec![DVector::zeros(geom.frame.codim()); k * k];
        for i in 0..k {
            for j in i..k {
                let h = geom.second.get(i, j);
                let c = geom.frame.tangent_coeffs(h);
                let s = geom.frame.normal_coeffs(h);
                christoffel[i * k + j] = c.clone();
                christoffel[j * k + i] = c;
                sigma[i * k + j] = s.clone();
                sigma[j * k + i] = s;
            }
        }
        Self { k, christoffel, sigma }
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn christoffel(&self, i: usize, j: usize) -> &DVector<f64> {
        &self.christoffel[i * self.k + j]
    }

    pub fn sigma_ij(&self, i: usize, j: usize) -> &DVector<f64> {
        &self.sigma[i * self.k + j]
    }

    fn contract(entries: &[DVector<f64>], k: usize, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(entries[0].len());
        for i in 0..k {
            for j in 0..k {
                let c = x[i] * y[j];
                if c != 0.0 {
                    out.axpy(c, &entries[i * k + j], 1.0);
                }
            }
        }
        out
    }

    /// `Γ(x, y) = Σ xᵢ yⱼ ∇_{∂ᵢ}∂ⱼ` (tensorial part of the connection).
    pub fn gamma(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        Self::contract(&self.christoffel, self.k, x, y)
    }

    /// `σ(x, y)` in normal-basis coordinates.
    pub fn sigma(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        Self::contract(&self.sigma, self.k, x, y)
    }

    /// `∇_X Y = X(Yⁱ)∂ᵢ + Γ(X, Y)` for a field `Y` with known first
    /// derivatives.
    pub fn nabla(&self, x: &DVector<f64>, y: &FieldAt) -> DVector<f64> {
        y.derivative_along(x) + self.gamma(x, &y.coeffs)
    }

    /// Shape operator `A_N` for `N` in normal-basis coordinates:
    /// `g(A_N X, Y) = g(σ(X,Y), N)`.
    pub fn shape_operator(&self, frame: &Frame, n: &DVector<f64>) -> DMatrix<f64> {
        let k = self.k;
        let m = DMatrix::from_fn(k, k, |i, j| self.sigma_ij(i, j).dot(n));
        &frame.gram_inv * m
    }
}

pub fn second_fundamental(spec: &ImmersionSpec, p: &[f64]) -> GeomResult<(PointGeometry, SecondFundamental)> {
    let geom = geometry_at(spec, p)?;
    let sf = SecondFundamental::from_geometry(&geom);
    Ok((geom, sf))
}

/// `shape_operator` for a spec and a point in one call.
pub fn shape_operator(spec: &ImmersionSpec, p: &[f64], n: &DVector<f64>) -> GeomResult<DMatrix<f64>> {
    let (geom, sf) = second_fundamental(spec, p)?;
    Ok(sf.shape_operator(&geom.frame, n))
}

/// Christoffel symbols from the metric alone, with `∂g` by central
/// differences of the Gram field. Entry `[i][j]` holds the vector `Γ^·ᵢⱼ`.
pub fn christoffel_from_metric(spec: &ImmersionSpec, p: &[f64]) -> GeomResult<Vec<Vec<DVector<f64>>>> {
    let k = spec.dim();
    let h = tol::FD_STEP;
    let centre = frame_at(spec, p)?;
    let mut dg = Vec::with_capacity(k);
    for l in 0..k {
        let mut plus = p.to_vec();
        let mut minus = p.to_vec();
        plus[l] += h;
        minus[l] -= h;
        let gp = frame_at(spec, &plus)?.gram;
        let gm = frame_at(spec, &minus)?.gram;
        dg.push((gp - gm) / (2.0 * h));
    }
    let mut out = vec![vec![DVector::zeros(k); k]; k];
    for i in 0..k {
        for j in 0..k {
            // lowered symbol Γ_{ij,l}
            let lowered = DVector::from_fn(k, |l, _| 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]));
            out[i][j] = &centre.gram_inv * lowered;
        }
    }
    Ok(out)
}

/// Tangential and normal parts of the ambient derivative of a normal field.
#[derive(Clone, Debug, PartialEq)]
pub struct WeingartenSplit {
    /// Tangent coordinates; should equal `-A_N x`.
    pub tangential: DVector<f64>,
    /// Normal-basis coordinates: `∇⊥_x N`.
    pub normal: DVector<f64>,
    /// `-A_{N(p)} x` from the second fundamental form.
    pub expected_tangential: DVector<f64>,
}

impl WeingartenSplit {
    /// `‖tangential + A_N x‖_g / max(1, ‖A_N x‖_g)`.
    pub fn residual(&self, frame: &Frame) -> f64 {
        let diff = &self.tangential - &self.expected_tangential;
        frame.norm(&diff) / unit_floor(frame.norm(&self.expected_tangential), 0.0)
    }
}

/// Differentiates an ambient-valued normal field along `x` by central
/// differences and splits the result. `richardson` combines steps `h` and
/// `h/2` to cancel the leading error term.
pub fn weingarten_split(
    spec: &ImmersionSpec,
    p: &[f64],
    normal_field: &(dyn Fn(&[f64]) -> GeomResult<DVector<f64>> + Sync),
    x: &DVector<f64>,
    richardson: bool,
) -> GeomResult<WeingartenSplit> {
    let eval = |q: &[f64]| -> GeomResult<DVector<f64>> {
        let v = normal_field(q)?;
        let frame = frame_at(spec, q)?;
        let residual = (frame.jacobian.transpose() * &v).amax();
        if residual > tol::NORMAL_FIELD * unit_floor(v.norm(), 0.0) {
            return Err(GeomError::NotNormal {
                point: q.to_vec(),
                residual,
            });
        }
        Ok(v)
    };
    let diff = |h: f64| -> GeomResult<DVector<f64>> {
        let plus: Vec<f64> = p.iter().zip(x.iter()).map(|(a, b)| a + h * b).collect();
        let minus: Vec<f64> = p.iter().zip(x.iter()).map(|(a, b)| a - h * b).collect();
        Ok((eval(&plus)? - eval(&minus)?) / (2.0 * h))
    };
    let h = tol::FD_STEP;
    let d = if richardson {
        let coarse = diff(h)?;
        let fine = diff(h / 2.0)?;
        (fine * 4.0 - coarse) / 3.0
    } else {
        diff(h)?
    };
    let (geom, sf) = second_fundamental(spec, p)?;
    let frame = &geom.frame;
    let n_here = frame.normal_coeffs(&eval(p)?);
    Ok(WeingartenSplit {
        tangential: frame.tangent_coeffs(&d),
        normal: frame.normal_coeffs(&d),
        expected_tangential: -(sf.shape_operator(frame, &n_here) * x),
    })
}

/// Ambient vector `ωX` of a tangent coefficient vector at a point: the
/// normal projection of `F·J·x`.
pub fn omega_ambient(spec: &ImmersionSpec, q: &[f64], x: &DVector<f64>) -> GeomResult<DVector<f64>> {
    let frame = frame_at(spec, q)?;
    let fx = spec.ambient.matrix() * frame.push(x);
    let tangent = frame.push(&frame.tangent_coeffs(&fx));
    Ok(fx - tangent)
}

pub const ANCHOR_GAUSS: &str = "∇̄_X Y = ∇_X Y + σ(X,Y)";
pub const ANCHOR_SHAPE: &str = "g(A_N X, Y) = g(σ(X,Y),N)";
pub const ANCHOR_SELF_ADJOINT: &str = "g(A_N X, Y) = g(X, A_N Y)";
pub const ANCHOR_WEINGARTEN: &str = "∇̄_X N = −A_N X + ∇⊥_X N";
pub const ANCHOR_CHRISTOFFEL: &str = "Γᵏᵢⱼ = ½ gᵏˡ(∂ᵢgⱼˡ + ∂ⱼgᵢˡ − ∂ˡgᵢⱼ)";

const SUITE: &str = "gauss-weingarten";

fn point_checks(spec: &ImmersionSpec, p: &[f64]) -> GeomResult<Vec<IdentityCheck>> {
    let (geom, sf) = second_fundamental(spec, p)?;
    let frame = &geom.frame;
    let k = frame.dim();
    let mut out = Vec::new();

    let mut gauss = 0.0_f64;
    let mut scale = 0.0_f64;
    for i in 0..k {
        for j in 0..k {
            let h = geom.second.get(i, j);
            let rebuilt = frame.push(sf.christoffel(i, j)) + frame.normal_vector(sf.sigma_ij(i, j));
            gauss = gauss.max((h - rebuilt).amax() / unit_floor(h.amax(), 0.0));
            scale = scale.max(h.amax());
        }
    }
    out.push(IdentityCheck::measured(SUITE, ANCHOR_GAUSS, "coordinate fields", p, scale, scale, gauss, tol::GAUSS));

    let metric = christoffel_from_metric(spec, p)?;
    let mut dev = 0.0_f64;
    for i in 0..k {
        for j in 0..k {
            let a = sf.christoffel(i, j);
            let b = &metric[i][j];
            dev = dev.max((a - b).amax() / unit_floor(a.amax(), 0.0));
        }
    }
    out.push(IdentityCheck::measured(SUITE, ANCHOR_CHRISTOFFEL, "metric vs projection", p, 0.0, 0.0, dev, tol::DIFFERENCED));

    if frame.codim() == 0 {
        return Ok(out);
    }

    let dirs = probe_coefficients(k, k + 2, p);
    for a in 0..frame.codim() {
        let n = DVector::from_fn(frame.codim(), |r, _| if r == a { 1.0 } else { 0.0 });
        let shape = sf.shape_operator(frame, &n);
        let ga = &frame.gram * &shape;
        let sa = (&ga - ga.transpose()).amax();
        out.push(IdentityCheck::measured(SUITE, ANCHOR_SELF_ADJOINT, format!("N=e{a}"), p, 0.0, 0.0, sa, tol::SHAPE_OPERATOR));
        for (d, pair) in dirs.chunks(2).enumerate() {
            let (x, y) = (&pair[0], &pair[pair.len() - 1]);
            let lhs = frame.g(&(&shape * x), y);
            let rhs = sf.sigma(x, y).dot(&n);
            out.push(IdentityCheck::scalar(SUITE, ANCHOR_SHAPE, format!("N=e{a}, pair {d}"), p, lhs, rhs, unit_floor(lhs, rhs), tol::SHAPE_OPERATOR));
        }
    }

    // normal fields ω(∂ᵢ), differentiated along every coordinate direction
    for i in 0..k {
        let ei = DVector::from_fn(k, |r, _| if r == i { 1.0 } else { 0.0 });
        let here = omega_ambient(spec, p, &ei)?;
        if here.norm() < tol::ANGLE_SNAP {
            continue;
        }
        let field = |q: &[f64]| omega_ambient(spec, q, &ei);
        for j in 0..k {
            let ej = DVector::from_fn(k, |r, _| if r == j { 1.0 } else { 0.0 });
            let split = weingarten_split(spec, p, &field, &ej, false)?;
            out.push(IdentityCheck::measured(
                SUITE,
                ANCHOR_WEINGARTEN,
                format!("N=ω(∂{}), X=∂{}", spec.chart[i], spec.chart[j]),
                p,
                frame.norm(&split.tangential),
                frame.norm(&split.expected_tangential),
                split.residual(frame),
                tol::DIFFERENCED,
            ));
        }
    }
    Ok(out)
}

pub fn check_gauss_weingarten(spec: &ImmersionSpec, points: &[Vec<f64>]) -> GeomResult<SuiteReport> {
    let checks = points
        .par_iter()
        .map(|p| point_checks(spec, p))
        .collect::<GeomResult<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(SuiteReport::new(SUITE, checks, Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersion::load_spec;

    const CIRCLE: &str = "ambient 2 signature + -\nchart t\ndomain t 0 6\nmap cos(t) , sin(t)\n";
    const POLAR: &str = "ambient 3 signature + - +\nchart r p\ndomain r 0.5 2 ; p 0 3\nmap r*cos(p) , r*sin(p) , 0\n";
    const EX62: &str = "\
ambient 6 signature - - - + + +
chart u v w
domain u 0 1 ; v 0.5 2 ; w 0.5 2
map v*cos(u) , v*sin(u) , -v+w , w*cos(u) , w*sin(u) , v+w
";

    #[test]
    fn affine_immersion_is_totally_geodesic() {
        let spec = load_spec("ambient 3 signature + - +\nchart a b\ndomain a 0 1 ; b 0 1\nmap a + b , a - 2*b , 3\n").unwrap();
        let (_, sf) = second_fundamental(&spec, &[0.2, 0.4]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(sf.christoffel(i, j).iter().all(|x| *x == 0.0));
                assert!(sf.sigma_ij(i, j).iter().all(|x| *x == 0.0));
            }
        }
    }

    #[test]
    fn unit_circle_curvature() {
        let spec = load_spec(CIRCLE).unwrap();
        let p = [0.8];
        let (geom, sf) = second_fundamental(&spec, &p).unwrap();
        assert!((sf.sigma_ij(0, 0).norm() - 1.0).abs() < 1e-14);
        // inward normal is -χ
        let inward = -DVector::from_vec(vec![0.8f64.cos(), 0.8f64.sin()]);
        let n = geom.frame.normal_coeffs(&inward);
        let a = sf.shape_operator(&geom.frame, &n);
        assert!((a[(0, 0)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn circle_weingarten() {
        let spec = load_spec(CIRCLE).unwrap();
        let field = |q: &[f64]| Ok(DVector::from_vec(vec![-q[0].cos(), -q[0].sin()]));
        let x = DVector::from_vec(vec![1.0]);
        let s = weingarten_split(&spec, &[0.8], &field, &x, false).unwrap();
        assert!((s.tangential[0] + 1.0).abs() < 1e-9);
        assert!(s.normal.amax() < 1e-9);
        let r = weingarten_split(&spec, &[0.8], &field, &x, true).unwrap();
        assert!((r.tangential[0] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn tangent_field_rejected_as_normal_field() {
        let spec = load_spec(CIRCLE).unwrap();
        let field = |q: &[f64]| Ok(DVector::from_vec(vec![-q[0].sin(), q[0].cos()]));
        let x = DVector::from_vec(vec![1.0]);
        assert!(matches!(
            weingarten_split(&spec, &[0.8], &field, &x, false),
            Err(GeomError::NotNormal { .. })
        ));
    }

    #[test]
    fn polar_christoffel_symbols() {
        let spec = load_spec(POLAR).unwrap();
        let p = [1.5, 0.3];
        let (_, sf) = second_fundamental(&spec, &p).unwrap();
        assert!((sf.christoffel(1, 1)[0] + 1.5).abs() < 1e-14);
        assert!((sf.christoffel(0, 1)[1] - 1.0 / 1.5).abs() < 1e-14);
        let m = christoffel_from_metric(&spec, &p).unwrap();
        assert!((m[1][1][0] + 1.5).abs() < 1e-8);
        assert!((m[0][1][1] - 1.0 / 1.5).abs() < 1e-8);
    }

    #[test]
    fn six_dimensional_mixed_sigma_vanishes() {
        let spec = load_spec(EX62).unwrap();
        let (_, sf) = second_fundamental(&spec, &[0.0, 1.0, 2.0]).unwrap();
        assert!(sf.sigma_ij(1, 2).iter().all(|x| *x == 0.0));
    }

    #[test]
    fn shape_operator_defining_equation() {
        let spec = load_spec(EX62).unwrap();
        let p = [0.4, 1.2, 0.7];
        let (geom, sf) = second_fundamental(&spec, &p).unwrap();
        let n = DVector::from_vec(vec![0.3, -1.1, 0.5]);
        let a = sf.shape_operator(&geom.frame, &n);
        let x = DVector::from_vec(vec![0.2, 1.0, -0.4]);
        let y = DVector::from_vec(vec![-0.7, 0.1, 0.9]);
        let lhs = geom.frame.g(&(&a * &x), &y);
        let rhs = sf.sigma(&x, &y).dot(&n);
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn weingarten_on_six_dimensional_example() {
        let spec = load_spec(EX62).unwrap();
        let ev = DVector::from_vec(vec![0.0, 1.0, 0.0]);
        let field = |q: &[f64]| omega_ambient(&spec, q, &ev);
        let x = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let p = [0.0, 1.0, 2.0];
        let s = weingarten_split(&spec, &p, &field, &x, false).unwrap();
        let frame = frame_at(&spec, &p).unwrap();
        assert!(s.residual(&frame) < 1e-5);
    }

    #[test]
    fn suite_passes_on_six_dimensional_example() {
        let spec = load_spec(EX62).unwrap();
        let r = check_gauss_weingarten(&spec, &[vec![0.3, 1.1, 0.9], vec![0.7, 0.6, 1.8]]).unwrap();
        assert!(r.passed(), "{:?}", r.checks.iter().filter(|c| c.failed()).collect::<Vec<_>>());
    }
}
