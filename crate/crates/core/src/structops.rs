//! Pointwise structure operators `FX = TX + ωX`, `FN = BN + CN`, slant
//! angles and their classification.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::ambient::ProductStructure;
use crate::check::{IdentityCheck, SuiteReport};
use crate::error::{GeomError, GeomResult};
use crate::immersion::{frame_at, Frame, ImmersionSpec, SlantClaim};
use crate::tol;

/// The four blocks of `F` in the frame `(J, normal)`.
///
/// `t` and `b` act into tangent coordinates, `w` and `c` into normal-basis
/// coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct PointwiseOps {
    pub t: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
}

/// Maximum absolute entries of the algebraic identities satisfied by the
/// blocks at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OperatorResiduals {
    /// `F·J - (J·T + N·W)`
    pub reconstruction: f64,
    /// `G·T - Tᵀ·G`
    pub g_symmetry: f64,
    /// `T² + B·W - I`
    pub tangent_square: f64,
    /// `W·T + C·W`
    pub normal_square: f64,
}

pub fn pointwise_ops(f: &ProductStructure, frame: &Frame) -> PointwiseOps {
    let fm = f.matrix();
    let fj = fm * &frame.jacobian;
    let fnm = fm * &frame.normal;
    let jt = frame.jacobian.transpose();
    let nt = frame.normal.transpose();
    PointwiseOps {
        t: &frame.gram_inv * (&jt * &fj),
        w: &nt * &fj,
        b: &frame.gram_inv * (&jt * &fnm),
        c: &nt * &fnm,
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

impl PointwiseOps {
    pub fn residuals(&self, f: &ProductStructure, frame: &Frame) -> OperatorResiduals {
        let k = frame.dim();
        let fj = f.matrix() * &frame.jacobian;
        let rebuilt = &frame.jacobian * &self.t + &frame.normal * &self.w;
        let gt = &frame.gram * &self.t;
        OperatorResiduals {
            reconstruction: max_abs(&(fj - rebuilt)),
            g_symmetry: max_abs(&(&gt - gt.transpose())),
            tangent_square: max_abs(&(&self.t * &self.t + &self.b * &self.w - DMatrix::identity(k, k))),
            normal_square: max_abs(&(&self.w * &self.t + &self.c * &self.w)),
        }
    }

    /// `‖Tx‖²_g / ‖x‖²_g`.
    pub fn cos2(&self, frame: &Frame, x: &DVector<f64>) -> f64 {
        let tx = &self.t * x;
        frame.g(&tx, &tx) / frame.g(x, x)
    }
}

/// Wirtinger angle of the direction `x`, in `[0, π/2]`.
///
/// `cos θ = ‖Tx‖_g / ‖x‖_g`; the result snaps to exactly `0` or `π/2` when
/// the normal or tangential part is below `1e-9·‖x‖_g`.
pub fn slant_angle(ops: &PointwiseOps, frame: &Frame, x: &DVector<f64>) -> GeomResult<f64> {
    let nx = frame.norm(x);
    if !(nx > 0.0) {
        return Err(GeomError::ZeroVector);
    }
    let tn = frame.norm(&(&ops.t * x));
    let wn = (&ops.w * x).norm();
    if wn < tol::ANGLE_SNAP * nx {
        return Ok(0.0);
    }
    if tn < tol::ANGLE_SNAP * nx {
        return Ok(FRAC_PI_2);
    }
    Ok(wn.atan2(tn))
}

/// g-orthogonal projector onto the column span of `basis` (k × r).
pub fn projector(frame: &Frame, basis: &DMatrix<f64>) -> GeomResult<DMatrix<f64>> {
    let gb = &frame.gram * basis;
    let small = basis.transpose() * &gb;
    let inv = small
        .cholesky()
        .ok_or_else(|| GeomError::Precondition("distribution basis is degenerate".into()))?
        .inverse();
    Ok(basis * inv * gb.transpose())
}

/// Average of `cos²θ(x)` over the distribution: `tr((BᵀGB)⁻¹ BᵀG T² B) / r`.
///
/// Equals `cos²θ` on a pointwise slant distribution, and is a smooth function
/// of the point, which makes it the quantity to difference.
pub fn mean_cos2(ops: &PointwiseOps, frame: &Frame, basis: &DMatrix<f64>) -> GeomResult<f64> {
    let r = basis.ncols();
    let gb = &frame.gram * basis;
    let small = basis.transpose() * &gb;
    let inv = small
        .cholesky()
        .ok_or_else(|| GeomError::Precondition("distribution basis is degenerate".into()))?
        .inverse();
    let t2b = &ops.t * &ops.t * basis;
    Ok((inv * gb.transpose() * t2b).trace() / r as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlantTag {
    Invariant,
    AntiInvariant,
    PointwiseSlant,
    NotSlant,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlantSample {
    pub point: Vec<f64>,
    pub distribution: String,
    pub angles: Vec<f64>,
    pub mean: f64,
    pub spread: f64,
    /// Mean of `cos²θ` over the probes.
    pub cos2: f64,
    /// Largest `‖ωx‖ / ‖x‖_g` among the probes.
    pub max_normal_ratio: f64,
    /// `‖(P·T)²x - cos²θ·x‖_g / ‖x‖_g`, maximised over the basis.
    pub eigen_residual: f64,
    pub tag: SlantTag,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlantClass {
    Invariant,
    AntiInvariant,
    SlantConstant,
    PointwiseSlant,
    /// Not pointwise slant at some sample point.
    None,
}

impl SlantClass {
    pub fn is_slant(self) -> bool {
        self != SlantClass::None
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SlantClass::Invariant => "invariant",
            SlantClass::AntiInvariant => "anti-invariant",
            SlantClass::SlantConstant => "slant-constant",
            SlantClass::PointwiseSlant => "pointwise-slant",
            SlantClass::None => "none",
        }
    }

    /// θ constant over the sampled points.
    pub fn is_constant(self) -> bool {
        matches!(self, SlantClass::Invariant | SlantClass::AntiInvariant | SlantClass::SlantConstant)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlantProfile {
    pub distribution: String,
    pub class: SlantClass,
    pub samples: Vec<SlantSample>,
    pub min_angle: f64,
    pub max_angle: f64,
    pub max_spread: f64,
    pub max_eigen_residual: f64,
}

impl SlantProfile {
    fn classify(distribution: String, samples: Vec<SlantSample>) -> Self {
        let max_spread = samples.iter().map(|s| s.spread).fold(0.0, f64::max);
        let min_angle = samples.iter().map(|s| s.mean).fold(f64::INFINITY, f64::min);
        let max_angle = samples.iter().map(|s| s.mean).fold(f64::NEG_INFINITY, f64::max);
        let max_eigen_residual = samples.iter().map(|s| s.eigen_residual).fold(0.0, f64::max);
        let class = if samples.iter().any(|s| s.tag == SlantTag::NotSlant) {
            SlantClass::None
        } else if samples.iter().all(|s| s.tag == SlantTag::Invariant) {
            SlantClass::Invariant
        } else if samples.iter().all(|s| s.tag == SlantTag::AntiInvariant) {
            SlantClass::AntiInvariant
        } else if max_angle - min_angle < tol::SLANT_CONSTANT {
            SlantClass::SlantConstant
        } else {
            SlantClass::PointwiseSlant
        };
        Self {
            distribution,
            class,
            samples,
            min_angle,
            max_angle,
            max_spread,
            max_eigen_residual,
        }
    }
}

/// Seed derived from the point coordinates, so probes do not depend on the
/// order in which points are processed.
fn point_seed(point: &[f64]) -> u64 {
    point.iter().fold(0x9e37_79b9_7f4a_7c15_u64, |acc, x| {
        (acc ^ x.to_bits()).wrapping_mul(0x0100_0000_01b3).rotate_left(17)
    })
}

/// Coefficient vectors (in the basis of the distribution) of the probe
/// directions: the basis itself followed by random unit vectors.
pub fn probe_coefficients(rank: usize, count: usize, point: &[f64]) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(point_seed(point));
    let mut out: Vec<DVector<f64>> = (0..rank)
        .map(|i| DVector::from_fn(rank, |j, _| if i == j { 1.0 } else { 0.0 }))
        .collect();
    while out.len() < count.max(rank) {
        let v = DVector::from_fn(rank, |_, _| StandardNormal.sample(&mut rng));
        let n: f64 = v.norm();
        if n > 1e-3 {
            out.push(v / n);
        }
    }
    out
}

/// Slant data for one distribution at one point.
pub fn slant_sample(
    ops: &PointwiseOps,
    frame: &Frame,
    name: &str,
    basis: &DMatrix<f64>,
    probes: usize,
) -> GeomResult<SlantSample> {
    let r = basis.ncols();
    let proj = projector(frame, basis)?;
    let mut angles = Vec::new();
    let mut cos2 = 0.0;
    let mut max_normal_ratio = 0.0_f64;
    let coeffs = probe_coefficients(r, probes.max(2 * r), &frame.point);
    for c in &coeffs {
        let x = basis * c;
        angles.push(slant_angle(ops, frame, &x)?);
        cos2 += ops.cos2(frame, &x);
        max_normal_ratio = max_normal_ratio.max((&ops.w * &x).norm() / frame.norm(&x));
    }
    cos2 /= coeffs.len() as f64;
    let mean = angles.iter().sum::<f64>() / angles.len() as f64;
    let spread = angles.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - angles.iter().copied().fold(f64::INFINITY, f64::min);

    let pt = &proj * &ops.t;
    let pt2 = &pt * &pt;
    let eigen_residual = basis
        .column_iter()
        .map(|x| {
            let x = x.clone_owned();
            frame.norm(&(&pt2 * &x - &x * cos2)) / frame.norm(&x)
        })
        .fold(0.0, f64::max);

    let tag = if spread >= tol::SLANT_SPREAD {
        SlantTag::NotSlant
    } else if mean < tol::SLANT_SPREAD {
        SlantTag::Invariant
    } else if mean > FRAC_PI_2 - tol::SLANT_SPREAD {
        SlantTag::AntiInvariant
    } else {
        SlantTag::PointwiseSlant
    };
    Ok(SlantSample {
        point: frame.point.clone(),
        distribution: name.to_string(),
        angles,
        mean,
        spread,
        cos2,
        max_normal_ratio,
        eigen_residual,
        tag,
    })
}

fn basis_at(spec: &ImmersionSpec, dist: usize, frame: &Frame) -> GeomResult<DMatrix<f64>> {
    let d = &spec.distributions[dist];
    let b = d.basis(&frame.point)?;
    let small = b.transpose() * &frame.gram * &b;
    let eig = small.symmetric_eigenvalues();
    if !(eig.min() > 0.0 && eig.max() / eig.min() <= tol::GRAM_CONDITION) {
        return Err(GeomError::DependentDistribution {
            name: d.name.clone(),
            point: frame.point.clone(),
        });
    }
    Ok(b)
}

/// Slant angles of a distribution over the sample points, classified.
pub fn slant_function(
    spec: &ImmersionSpec,
    dist: &str,
    points: &[Vec<f64>],
    probes: usize,
) -> GeomResult<SlantProfile> {
    let idx = spec.distribution_index(dist)?;
    let samples = points
        .par_iter()
        .map(|p| {
            let frame = frame_at(spec, p)?;
            let ops = pointwise_ops(&spec.ambient, &frame);
            let basis = basis_at(spec, idx, &frame)?;
            slant_sample(&ops, &frame, dist, &basis, probes)
        })
        .collect::<GeomResult<Vec<_>>>()?;
    Ok(SlantProfile::classify(dist.to_string(), samples))
}

/// Default number of probe directions per point.
pub const DEFAULT_PROBES: usize = 8;

/// Comparison of a claimed slant function with the computed one, on cos²θ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlantClaimCheck {
    pub distribution: String,
    pub claim: String,
    pub computed_class: SlantClass,
    pub computed_cos_min: f64,
    pub computed_cos_max: f64,
    pub max_cos2_deviation: f64,
    pub worst_point: Vec<f64>,
    pub threshold: f64,
    pub matches: bool,
}

pub fn compare_slant_claim(profile: &SlantProfile, claim: &SlantClaim) -> GeomResult<SlantClaimCheck> {
    let mut worst = (0.0_f64, Vec::new());
    for s in &profile.samples {
        let theta = claim.angle.eval(&s.point).map_err(|source| GeomError::Eval {
            what: format!("slant claim for {}", claim.distribution),
            point: s.point.clone(),
            source,
        })?;
        let dev = (theta.cos().powi(2) - s.cos2).abs();
        if !(dev <= worst.0) {
            worst = (dev, s.point.clone());
        }
    }
    let cos = |s: &SlantSample| s.cos2.max(0.0).sqrt();
    let computed_cos_min = profile.samples.iter().map(cos).fold(f64::INFINITY, f64::min);
    let computed_cos_max = profile.samples.iter().map(cos).fold(f64::NEG_INFINITY, f64::max);
    Ok(SlantClaimCheck {
        distribution: profile.distribution.clone(),
        claim: claim.text.clone(),
        computed_class: profile.class,
        computed_cos_min,
        computed_cos_max,
        max_cos2_deviation: worst.0,
        worst_point: worst.1,
        threshold: tol::SLANT_CLAIM,
        matches: profile.class.is_slant() && worst.0 < tol::SLANT_CLAIM,
    })
}

pub const ANCHOR_RECONSTRUCTION: &str = "FX = TX + ωX";
pub const ANCHOR_G_SYMMETRY: &str = "g(TX,Y) = g(X,TY)";
pub const ANCHOR_NORM_SPLIT: &str = "‖TX‖² + ‖ωX‖² = ‖X‖²";
pub const ANCHOR_TANGENT_SQUARE: &str = "T² + Bω = I";
pub const ANCHOR_NORMAL_SQUARE: &str = "ωT + Cω = 0";
pub const ANCHOR_EIGEN: &str = "T² = (cos²θ)I";
pub const ANCHOR_TT: &str = "g(TX,TY) = (cos²θ)g(X,Y)";
pub const ANCHOR_WW: &str = "g(ωX, ωY) = (sin²θ)g(X,Y)";
pub const ANCHOR_BW: &str = "Bω X = (sin²θ)X";
pub const ANCHOR_CW: &str = "Cω X = −ωTX";

const SUITE: &str = "eq2";

/// Operator identities that hold at every regular point.
fn operator_checks(spec: &ImmersionSpec, frame: &Frame, ops: &PointwiseOps) -> Vec<IdentityCheck> {
    let p = &frame.point;
    let r = ops.residuals(&spec.ambient, frame);
    let mut out = vec![
        IdentityCheck::measured(SUITE, ANCHOR_RECONSTRUCTION, "coordinate frame", p, 0.0, 0.0, r.reconstruction, tol::STRUCT_IDENTITY),
        IdentityCheck::measured(SUITE, ANCHOR_G_SYMMETRY, "coordinate frame", p, 0.0, 0.0, r.g_symmetry, tol::STRUCT_IDENTITY),
        IdentityCheck::measured(SUITE, ANCHOR_TANGENT_SQUARE, "coordinate frame", p, 0.0, 0.0, r.tangent_square, tol::STRUCT_IDENTITY),
        IdentityCheck::measured(SUITE, ANCHOR_NORMAL_SQUARE, "coordinate frame", p, 0.0, 0.0, r.normal_square, tol::STRUCT_IDENTITY),
    ];
    let k = frame.dim();
    for (i, x) in probe_coefficients(k, k + 2, p).into_iter().enumerate() {
        let tx = &ops.t * &x;
        let lhs = frame.g(&tx, &tx) + (&ops.w * &x).norm_squared();
        let rhs = frame.g(&x, &x);
        out.push(IdentityCheck::scalar(SUITE, ANCHOR_NORM_SPLIT, format!("direction {i}"), p, lhs, rhs, rhs, tol::STRUCT_IDENTITY));
    }
    out
}

/// Slant identities for one distribution at one point. `cos2` is the slant
/// function value there.
fn slant_checks(
    frame: &Frame,
    ops: &PointwiseOps,
    name: &str,
    basis: &DMatrix<f64>,
    sample: &SlantSample,
) -> Vec<IdentityCheck> {
    let p = &frame.point;
    let cos2 = sample.cos2;
    let sin2 = 1.0 - cos2;
    let mut out = vec![IdentityCheck::measured(
        SUITE,
        ANCHOR_EIGEN,
        format!("{name} basis"),
        p,
        0.0,
        0.0,
        sample.eigen_residual,
        tol::SLANT_IDENTITY,
    )];
    let coeffs = probe_coefficients(basis.ncols(), 8.max(basis.ncols()), p);
    // pair consecutive probes: four pairs
    for (i, pair) in coeffs.chunks(2).take(4).enumerate() {
        let x = basis * &pair[0];
        let y = basis * &pair[pair.len() - 1];
        let probe = format!("{name} pair {i}");
        let scale = frame.norm(&x) * frame.norm(&y);
        let (tx, ty) = (&ops.t * &x, &ops.t * &y);
        let (wx, wy) = (&ops.w * &x, &ops.w * &y);
        let gxy = frame.g(&x, &y);
        out.push(IdentityCheck::scalar(SUITE, ANCHOR_TT, probe.clone(), p, frame.g(&tx, &ty), cos2 * gxy, scale, tol::SLANT_IDENTITY));
        out.push(IdentityCheck::scalar(SUITE, ANCHOR_WW, probe.clone(), p, wx.dot(&wy), sin2 * gxy, scale, tol::SLANT_IDENTITY));
        let bwx = &ops.b * &wx;
        let lhs_n = frame.norm(&bwx);
        let res = frame.norm(&(&bwx - &x * sin2)) / frame.norm(&x);
        out.push(IdentityCheck::measured(SUITE, ANCHOR_BW, probe.clone(), p, lhs_n, sin2 * frame.norm(&x), res, tol::SLANT_IDENTITY));
        let cwx = &ops.c * &wx;
        let wtx = &ops.w * &tx;
        let res = (&cwx + &wtx).norm() / frame.norm(&x);
        out.push(IdentityCheck::measured(SUITE, ANCHOR_CW, probe, p, cwx.norm(), wtx.norm(), res, tol::SLANT_IDENTITY));
    }
    out
}

/// The slant identities for one distribution over the given points.
pub fn check_eq_2_8_2_9(spec: &ImmersionSpec, dist: &str, points: &[Vec<f64>]) -> GeomResult<Vec<IdentityCheck>> {
    let idx = spec.distribution_index(dist)?;
    let per_point = points
        .par_iter()
        .map(|p| {
            let frame = frame_at(spec, p)?;
            let ops = pointwise_ops(&spec.ambient, &frame);
            let basis = basis_at(spec, idx, &frame)?;
            let sample = slant_sample(&ops, &frame, dist, &basis, DEFAULT_PROBES)?;
            if sample.tag == SlantTag::NotSlant {
                return Ok(vec![IdentityCheck::skipped(
                    SUITE,
                    ANCHOR_TT,
                    dist,
                    p,
                    tol::SLANT_IDENTITY,
                    format!("{dist} is not pointwise slant here (spread {:.3e} rad)", sample.spread),
                )]);
            }
            Ok(slant_checks(&frame, &ops, dist, &basis, &sample))
        })
        .collect::<GeomResult<Vec<_>>>()?;
    Ok(per_point.into_iter().flatten().collect())
}

/// Operator identities at every point plus the slant identities for every
/// declared distribution.
pub fn check_structure_suite(spec: &ImmersionSpec, points: &[Vec<f64>]) -> GeomResult<SuiteReport> {
    let mut checks = points
        .par_iter()
        .map(|p| {
            let frame = frame_at(spec, p)?;
            let ops = pointwise_ops(&spec.ambient, &frame);
            Ok(operator_checks(spec, &frame, &ops))
        })
        .collect::<GeomResult<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
    for d in &spec.distributions {
        checks.extend(check_eq_2_8_2_9(spec, &d.name, points)?);
    }
    Ok(SuiteReport::new(SUITE, checks, Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersion::load_spec;

    const EX61: &str = "\
ambient 4 signature + + - -
chart u v w
domain u 0.5 2.0 ; v 0.0 6.283185 ; w 0.5 2.0
map w*u*cos(v) , w*u*sin(v) , w*cos(v) , w*sin(v)
dist D1 = du , dw
dist D2 = dv
";

    fn ops_at(text: &str, p: &[f64]) -> (Frame, PointwiseOps) {
        let spec = load_spec(text).unwrap();
        let f = frame_at(&spec, p).unwrap();
        let ops = pointwise_ops(&spec.ambient, &f);
        (f, ops)
    }

    #[test]
    fn fiber_direction_scaled_by_three_fifths() {
        // T∂v = ((u²-1)/(u²+1)) ∂v at u = 2
        let (_, ops) = ops_at(EX61, &[2.0, 0.0, 1.0]);
        let x = DVector::from_vec(vec![0.0, 1.0, 0.0]);
        let tx = &ops.t * &x;
        assert!((tx[1] - 0.6).abs() < 1e-14);
        assert!(tx[0].abs() < 1e-14 && tx[2].abs() < 1e-14);
    }

    #[test]
    fn first_coordinate_field_is_fixed() {
        let (f, ops) = ops_at(EX61, &[1.3, 0.7, 0.9]);
        let x = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        assert!((&ops.t * &x - &x).amax() < 1e-14);
        assert!((&ops.w * &x).amax() < 1e-14);
        assert_eq!(slant_angle(&ops, &f, &x).unwrap(), 0.0);
    }

    #[test]
    fn anti_invariant_curve() {
        let text = "ambient 2 signature + -\nchart t\ndomain t 0 1\nmap t , t\n";
        let (f, ops) = ops_at(text, &[0.5]);
        assert!(ops.t.amax() < 1e-15);
        assert!((ops.w[(0, 0)].abs() - 2f64.sqrt()).abs() < 1e-14);
        let x = DVector::from_vec(vec![1.0]);
        assert_eq!(slant_angle(&ops, &f, &x).unwrap(), FRAC_PI_2);
    }

    #[test]
    fn fiber_direction_at_unit_radius_is_anti_invariant() {
        let (f, ops) = ops_at(EX61, &[1.0, 0.3, 1.4]);
        let x = DVector::from_vec(vec![0.0, 1.0, 0.0]);
        assert_eq!(slant_angle(&ops, &f, &x).unwrap(), FRAC_PI_2);
    }

    #[test]
    fn zero_vector_rejected() {
        let (f, ops) = ops_at(EX61, &[1.0, 0.3, 1.4]);
        assert_eq!(slant_angle(&ops, &f, &DVector::zeros(3)), Err(GeomError::ZeroVector));
    }

    #[test]
    fn six_dimensional_first_field() {
        // cos θ = |w²-v²|/(w²+v²) = 3/5 at (0, 1, 2)
        let text = "\
ambient 6 signature - - - + + +
chart u v w
domain u 0 1 ; v 0.5 2 ; w 0.5 2
map v*cos(u) , v*sin(u) , -v+w , w*cos(u) , w*sin(u) , v+w
";
        let (f, ops) = ops_at(text, &[0.0, 1.0, 2.0]);
        let x = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let theta = slant_angle(&ops, &f, &x).unwrap();
        assert!((theta.cos() - 0.6).abs() < 1e-14);
    }

    #[test]
    fn residuals_are_tiny() {
        let (f, ops) = ops_at(EX61, &[1.7, 2.1, 0.6]);
        let spec = load_spec(EX61).unwrap();
        let r = ops.residuals(&spec.ambient, &f);
        assert!(r.reconstruction < 1e-12);
        assert!(r.g_symmetry < 1e-12);
        assert!(r.tangent_square < 1e-12);
        assert!(r.normal_square < 1e-12);
    }

    #[test]
    fn probes_are_deterministic_and_unit() {
        let a = probe_coefficients(2, 6, &[0.1, 0.2]);
        let b = probe_coefficients(2, 6, &[0.1, 0.2]);
        assert_eq!(a, b);
        assert_eq!(a.len(), 6);
        for v in &a {
            assert!((v.norm() - 1.0).abs() < 1e-14);
        }
        assert_ne!(a, probe_coefficients(2, 6, &[0.1, 0.3]));
    }

    #[test]
    fn mean_cos2_matches_rayleigh_quotient_on_slant_distribution() {
        let (f, ops) = ops_at(EX61, &[1.5, 0.2, 1.1]);
        let b = DMatrix::from_column_slice(3, 1, &[0.0, 1.0, 0.0]);
        let c2 = mean_cos2(&ops, &f, &b).unwrap();
        let expected = ((1.5f64 * 1.5 - 1.0) / (1.5 * 1.5 + 1.0)).powi(2);
        assert!((c2 - expected).abs() < 1e-14);
    }

    #[test]
    fn projector_is_idempotent() {
        let (f, _) = ops_at(EX61, &[1.5, 0.2, 1.1]);
        let b = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let p = projector(&f, &b).unwrap();
        assert!((&p * &p - &p).amax() < 1e-13);
        assert!((&p * &b - &b).amax() < 1e-13);
    }
}
