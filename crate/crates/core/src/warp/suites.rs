//! Identity suites on a warped split: base fields play `X, Y` (index 1),
//! fiber fields play `Z, W` (index 2).

use nalgebra::DVector;
use rayon::prelude::*;

use super::{central_difference, recover_warping, warp_roles, LogWarp, Potential, WarpRoles};
use crate::check::{unit_floor, IdentityCheck, SuiteReport};
use crate::dist::{lemma_3_2_ii_sides, BiSlantPoint};
use crate::error::GeomResult;
use crate::immersion::{frame_at, FieldAt, ImmersionSpec};
use crate::structops::{mean_cos2, pointwise_ops, slant_function, SlantClass, DEFAULT_PROBES};
use crate::tol;

pub const ANCHOR_WARP_CONNECTION_XZ: &str = "∇_X Z = (X ln f)Z";
pub const ANCHOR_WARP_CONNECTION_ZX: &str = "∇_Z X = (X ln f)Z";
pub const ANCHOR_LEMMA_4_1: &str = "g(σ(X,W), ωT_2Z) + g(σ(X,T_2Z), ωW) = −(sin 2θ_2)X(θ_2)g(Z,W)";
pub const ANCHOR_LEMMA_4_2: &str = "g(σ(X,Z), ωW) + g(σ(X,W), ωZ) = −2(tan θ_2)X(θ_2)g(T_2Z,W)";
pub const ANCHOR_LEMMA_4_3_I: &str = "(i) g(σ(X,Z),ωW) = g(σ(X,W),ωZ)";
pub const ANCHOR_LEMMA_4_3_II: &str = "(ii) g(σ(X,Z),ωY) = −g(σ(X,Y),ωZ)";
pub const ANCHOR_LEMMA_4_3_PROOF: &str = "g(σ(X,Z),ωW) = T_1X(ln f)g(Z,W) − g(σ(Z,W),ωX) − X(ln f)g(Z,T_2W)";
pub const ANCHOR_THEOREM_4_4: &str =
    "g(A_{ωT_1X}W + A_{ωX}T_2W, Z) + g(A_{ωT_2W}X + A_{ωW}T_1X, Z) = (sin²θ_2 − sin²θ_1)X(ln f)g(Z,W)";
pub const ANCHOR_THEOREM_CONSISTENCY: &str = "theorem left side = mixed identity (ii) right side with D_1 = base";
pub const ANCHOR_CHARACTERIZATION: &str =
    "A_{ωT_1X}Z + A_{ωX}T_2Z + A_{ωT_2Z}X + A_{ωZ}T_1X = (sin²θ_2 − sin²θ_1)X(μ)Z";
pub const ANCHOR_FIBER_CONSTANT: &str = "W(μ) = 0 for any W ∈ D_2";
pub const ANCHOR_CASE_1: &str = "A_{ωTZ}X + A_{ωZ}FX = (sin²θ)X(μ)Z";
pub const ANCHOR_CASE_2: &str = "A_{ωTX}Z + A_{FZ}TX = (cos²θ)X(μ)Z";
pub const ANCHOR_CASE_3: &str = "A_{FZ}FX = X(μ)Z";
pub const ANCHOR_CASE_CONSISTENCY: &str = "reduced left side = full characterization left side";
pub const ANCHOR_TOTALLY_GEODESIC: &str = "P_2∇_X Y = 0: leaves of D_1 totally geodesic";
pub const ANCHOR_UMBILICAL: &str = "P_1∇_Z W = −g(Z,W)∇̄μ: leaves of D_2 totally umbilical with H_2 = −∇̄μ";

/// Roles of a verified warped product, or the report explaining why the
/// suite does not apply.
fn warped_roles_or_skip(spec: &ImmersionSpec, points: &[Vec<f64>], suite: &str) -> GeomResult<Result<WarpRoles, SuiteReport>> {
    let roles = warp_roles(spec)?;
    let w = recover_warping(spec, points)?;
    if w.verdict.is_warped() {
        Ok(Ok(roles))
    } else {
        Ok(Err(SuiteReport::inapplicable(suite, format!("{}: {}", w.verdict.as_str(), w.notes.join("; ")))))
    }
}

/// Mean `cos²θ` of a distribution at an arbitrary chart point.
fn cos2_at(spec: &ImmersionSpec, dist: usize, q: &[f64]) -> GeomResult<f64> {
    let frame = frame_at(spec, q)?;
    let ops = pointwise_ops(&spec.ambient, &frame);
    let basis = spec.distributions[dist].basis(q)?;
    mean_cos2(&ops, &frame, &basis)
}

/// Runs `per_point` in parallel and merges the records in point order.
fn collect<F>(points: &[Vec<f64>], per_point: F) -> GeomResult<Vec<IdentityCheck>>
where
    F: Fn(&[f64]) -> GeomResult<Vec<IdentityCheck>> + Sync,
{
    Ok(points
        .par_iter()
        .map(|p| per_point(p))
        .collect::<GeomResult<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect())
}

fn vector_check(
    pt: &BiSlantPoint,
    suite: &str,
    anchor: &'static str,
    probe: String,
    lhs: &DVector<f64>,
    rhs: &DVector<f64>,
    threshold: f64,
) -> IdentityCheck {
    let (a, b) = (pt.norm(lhs), pt.norm(rhs));
    let r = pt.norm(&(lhs - rhs)) / unit_floor(a, b);
    IdentityCheck::measured(suite, anchor, probe, pt.point(), a, b, r, threshold)
}

pub fn check_warp_connection(spec: &ImmersionSpec, points: &[Vec<f64>]) -> GeomResult<SuiteReport> {
    let suite = "warp-connection";
    let roles = match warped_roles_or_skip(spec, points, suite)? {
        Ok(r) => r,
        Err(report) => return Ok(report),
    };
    let lw = LogWarp::for_spec(spec, roles);
    let checks = collect(points, |p| {
        let pt = BiSlantPoint::new(spec, p)?;
        let mut out = Vec::new();
        for (lx, x) in pt.dists[roles.base].probes() {
            let xlnf = lw.derivative(spec, p, &x.coeffs)?;
            for (lz, z) in pt.dists[roles.fiber].probes() {
                let rhs = &z.coeffs * xlnf;
                let probe = format!("X={lx}, Z={lz}");
                let xz = pt.nabla(&x.coeffs, &z);
                let zx = pt.nabla(&z.coeffs, &x);
                out.push(vector_check(&pt, suite, ANCHOR_WARP_CONNECTION_XZ, probe.clone(), &xz, &rhs, tol::DIFFERENCED));
                out.push(vector_check(&pt, suite, ANCHOR_WARP_CONNECTION_ZX, probe, &zx, &rhs, tol::DIFFERENCED));
            }
        }
        Ok(out)
    })?;
    Ok(SuiteReport::new(suite, checks, Vec::new()))
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Diagnostic for identities that fail by a constant factor.
fn ratio_note(checks: &[IdentityCheck]) -> Option<String> {
    let ratios: Vec<f64> = checks
        .iter()
        .filter_map(|c| match (c.lhs, c.rhs) {
            (Some(l), Some(r)) if r.abs() > 1e-8 => Some(l / r),
            _ => None,
        })
        .collect();
    median(ratios).map(|m| format!("median lhs/rhs over checks with |rhs| > 1e-8: {m:.10}"))
}

/// Shared driver for the two slant-derivative lemmas. `sides` gets the
/// point, `X(cos²θ₂)`, and the probe fields.
fn slant_derivative_suite(
    spec: &ImmersionSpec,
    points: &[Vec<f64>],
    suite: &str,
    anchor: &'static str,
    sides: impl Fn(&BiSlantPoint, WarpRoles, f64, &FieldAt, &FieldAt, &FieldAt) -> (f64, f64) + Sync,
) -> GeomResult<SuiteReport> {
    let roles = match warped_roles_or_skip(spec, points, suite)? {
        Ok(r) => r,
        Err(report) => return Ok(report),
    };
    let checks = collect(points, |p| {
        let pt = BiSlantPoint::new(spec, p)?;
        let theta2 = pt.dists[roles.fiber].angle();
        if !(tol::ANGLE_DEGENERATE..=std::f64::consts::FRAC_PI_2 - tol::ANGLE_DEGENERATE).contains(&theta2) {
            let reason = format!("θ_2 = {theta2:.3e} is within {:e} of 0 or π/2", tol::ANGLE_DEGENERATE);
            return Ok(vec![IdentityCheck::skipped(suite, anchor, "", p, tol::DIFFERENCED, reason)]);
        }
        let mut out = Vec::new();
        for (lx, x) in pt.dists[roles.base].probes() {
            // X(cos²θ₂) = −sin 2θ₂ · X(θ₂)
            let dc2 = central_difference(p, &x.coeffs, |q| cos2_at(spec, roles.fiber, q))?;
            for (lz, z) in pt.dists[roles.fiber].probes() {
                for (lw, w) in pt.dists[roles.fiber].probes() {
                    let (lhs, rhs) = sides(&pt, roles, dc2, &x, &z, &w);
                    let probe = format!("X={lx}, Z={lz}, W={lw}");
                    out.push(IdentityCheck::scalar(suite, anchor, probe, p, lhs, rhs, unit_floor(lhs, rhs), tol::DIFFERENCED));
                }
            }
        }
        Ok(out)
    })?;
    let mut notes = Vec::new();
    let skipped = checks.iter().filter(|c| c.is_skipped()).count();
    if skipped > 0 {
        notes.push(format!("{skipped} points skipped: θ_2 degenerate"));
    }
    if checks.iter().any(|c| c.failed()) {
        notes.extend(ratio_note(&checks));
    }
    Ok(SuiteReport::new(suite, checks, notes))
}

pub fn check_lemma_4_1(spec: &ImmersionSpec, points: &[Vec<f64>]) -> GeomResult<SuiteReport> {
    slant_derivative_suite(spec, points, "lemma4.1", ANCHOR_LEMMA_4_1, |pt, r, dc2, x, z, w| {
        let (x, z, w) = (&x.coeffs, &z.coeffs, &w.coeffs);
        let t2z = pt.t_part(r.fiber, z);
        let lhs = pt.sigma_omega(x, w, &t2z) + pt.sigma_omega(x, &t2z, w);
        (lhs, dc2 * pt.g(z, w))
    })
}

pub fn check_lemma_4_2(spec: &ImmersionSpec, points: &[Vec<f64>]) -> GeomResult<SuiteReport> {
    slant_derivative_suite(spec, points, "lemma4.2", ANCHOR_LEMMA_4_2, |pt, r, dc2, x, z, w| {
        let (x, z, w) = (&x.coeffs, &z.coeffs, &w.coeffs);
        let lhs = pt.sigma_omega(x, z, w) + pt.sigma_omega(x, w, z);
        // 2 tan θ X(θ) = −X(cos²θ) / cos²θ
        let c2 = pt.dists[r.fiber].cos2;
        (lhs, dc2 / c2 * pt.g(&pt.t_part(r.fiber, z), w))
    })
}

pub fn check_lemma_4_3(spec: &ImmersionSpec, points: &[Vec<f64>]) -> GeomResult<SuiteReport> {
    let suite = "lemma4.3";
    let roles = match warped_roles_or_skip(spec, points, suite)? {
        Ok(r) => r,
        Err(report) => return Ok(report),
    };
    let lw = LogWarp::for_spec(spec, roles);
    let checks = collect(points, |p| {
        let pt = BiSlantPoint::new(spec, p)?;
        let (base, fiber) = (pt.dists[roles.base].probes(), pt.dists[roles.fiber].probes());
        let mut out = Vec::new();
        let scalar = |anchor, probe: String, lhs: f64, rhs: f64| {
            IdentityCheck::scalar(suite, anchor, probe, p, lhs, rhs, unit_floor(lhs, rhs), tol::DIFFERENCED)
        };
        for (lx, x) in &base {
            let x = &x.coeffs;
            let t1x = pt.t_part(roles.base, x);
            let xlnf = lw.derivative(spec, p, x)?;
            let t1xlnf = lw.derivative(spec, p, &t1x)?;
            for (lz, z) in &fiber {
                let z = &z.coeffs;
                for (lw_, w) in &fiber {
                    let w = &w.coeffs;
                    let probe = format!("X={lx}, Z={lz}, W={lw_}");
                    let lhs = pt.sigma_omega(x, z, w);
                    out.push(scalar(ANCHOR_LEMMA_4_3_I, probe.clone(), lhs, pt.sigma_omega(x, w, z)));
                    let t2w = pt.t_part(roles.fiber, w);
                    let rhs = t1xlnf * pt.g(z, w) - pt.sigma_omega(z, w, x) - xlnf * pt.g(z, &t2w);
                    out.push(scalar(ANCHOR_LEMMA_4_3_PROOF, probe, lhs, rhs));
                }
                for (ly, y) in &base {
                    let y = &y.coeffs;
                    let probe = format!("X={lx}, Y={ly}, Z={lz}");
                    out.push(scalar(ANCHOR_LEMMA_4_3_II, probe, pt.sigma_omega(x, z, y), -pt.sigma_omega(x, y, z)));
                }
            }
        }
        Ok(out)
    })?;
    Ok(SuiteReport::new(suite, checks, Vec::new()))
}

pub fn check_theorem_4_4(spec: &ImmersionSpec, points: &[Vec<f64>]) -> GeomResult<SuiteReport> {
    let suite = "thm4.4";
    let roles = match warped_roles_or_skip(spec, points, suite)? {
        Ok(r) => r,
        Err(report) => return Ok(report),
    };
    let lw = LogWarp::for_spec(spec, roles);
    let checks = collect(points, |p| {
        let pt = BiSlantPoint::new(spec, p)?;
        let (b, f) = (roles.base, roles.fiber);
        let gap = pt.dists[f].sin2() - pt.dists[b].sin2();
        let mut out = Vec::new();
        for (lx, xf) in pt.dists[b].probes() {
            let x = &xf.coeffs;
            let t1x = pt.t_part(b, x);
            let xlnf = lw.derivative(spec, p, x)?;
            for (lz, zf) in pt.dists[f].probes() {
                for (lw_, wf) in pt.dists[f].probes() {
                    let (z, w) = (&zf.coeffs, &wf.coeffs);
                    let t2w = pt.t_part(f, w);
                    let lhs = pt.g(&(pt.shape(&pt.omega(&t1x), w) + pt.shape(&pt.omega(x), &t2w)), z)
                        + pt.g(&(pt.shape(&pt.omega(&t2w), x) + pt.shape(&pt.omega(w), &t1x)), z);
                    let rhs = gap * xlnf * pt.g(z, w);
                    let probe = format!("X={lx}, Z={lz}, W={lw_}");
                    out.push(IdentityCheck::scalar(suite, ANCHOR_THEOREM_4_4, probe.clone(), p, lhs, rhs, unit_floor(lhs, rhs), tol::DIFFERENCED));
                    let (_, mixed) = lemma_3_2_ii_sides(&pt, b, f, &xf, &zf, &wf);
                    out.push(IdentityCheck::scalar(
                        suite,
                        ANCHOR_THEOREM_CONSISTENCY,
                        probe,
                        p,
                        lhs,
                        mixed,
                        unit_floor(lhs, mixed),
                        tol::CONSISTENCY,
                    ));
                }
            }
        }
        Ok(out)
    })?;
    Ok(SuiteReport::new(suite, checks, Vec::new()))
}

/// Left side of the characterization as a tangent vector.
fn characterization_lhs(pt: &BiSlantPoint, r: WarpRoles, x: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
    let t1x = pt.t_part(r.base, x);
    let t2z = pt.t_part(r.fiber, z);
    pt.shape(&pt.omega(&t1x), z) + pt.shape(&pt.omega(x), &t2z) + pt.shape(&pt.omega(&t2z), x) + pt.shape(&pt.omega(z), &t1x)
}

fn fiber_constant_checks(
    spec: &ImmersionSpec,
    pt: &BiSlantPoint,
    r: WarpRoles,
    mu: &Potential,
    suite: &str,
) -> GeomResult<Vec<IdentityCheck>> {
    let p = pt.point();
    pt.dists[r.fiber]
        .probes()
        .into_iter()
        .map(|(lw, w)| {
            let wmu = mu.derivative(spec, p, &w.coeffs)?;
            Ok(IdentityCheck::measured(suite, ANCHOR_FIBER_CONSTANT, format!("W={lw}"), p, wmu, 0.0, wmu.abs(), tol::FIBER_CONSTANT))
        })
        .collect()
}

pub fn check_characterization(spec: &ImmersionSpec, points: &[Vec<f64>]) -> GeomResult<SuiteReport> {
    let suite = "eq5.1";
    let roles = warp_roles(spec)?;
    let mu = Potential::for_spec(spec)?;
    let checks = collect(points, |p| {
        let pt = BiSlantPoint::new(spec, p)?;
        let gap = pt.dists[roles.fiber].sin2() - pt.dists[roles.base].sin2();
        let mut out = Vec::new();
        for (lx, x) in pt.dists[roles.base].probes() {
            let xmu = mu.derivative(spec, p, &x.coeffs)?;
            for (lz, z) in pt.dists[roles.fiber].probes() {
                let lhs = characterization_lhs(&pt, roles, &x.coeffs, &z.coeffs);
                let rhs = &z.coeffs * (gap * xmu);
                out.push(vector_check(&pt, suite, ANCHOR_CHARACTERIZATION, format!("X={lx}, Z={lz}"), &lhs, &rhs, tol::DIFFERENCED));
            }
        }
        out.extend(fiber_constant_checks(spec, &pt, roles, &mu, suite)?);
        Ok(out)
    })?;
    Ok(SuiteReport::new(suite, checks, vec![mu.describe().to_string()]))
}

/// The three reductions of the characterization, each gated on the
/// computed classification of base and fiber.
pub fn check_special_cases(spec: &ImmersionSpec, points: &[Vec<f64>]) -> GeomResult<SuiteReport> {
    let suite = "cases";
    let roles = warp_roles(spec)?;
    let mu = Potential::for_spec(spec)?;
    let c1 = slant_function(spec, &spec.distributions[roles.base].name, points, DEFAULT_PROBES)?.class;
    let c2 = slant_function(spec, &spec.distributions[roles.fiber].name, points, DEFAULT_PROBES)?.class;
    let case1 = c1 == SlantClass::Invariant;
    let case2 = c2 == SlantClass::AntiInvariant && c1.is_constant();
    let case3 = case1 && c2 == SlantClass::AntiInvariant;
    let mut notes = vec![format!("base {}, fiber {}", c1.as_str(), c2.as_str())];
    for (on, name, why) in [
        (case1, "case 1", "needs θ_1 = 0"),
        (case2, "case 2", "needs θ_2 = π/2 and θ_1 constant"),
        (case3, "case 3", "needs θ_1 = 0 and θ_2 = π/2"),
    ] {
        if !on {
            notes.push(format!("{name} skipped: {why}"));
        }
    }
    if !(case1 || case2 || case3) {
        return Ok(SuiteReport::new(suite, Vec::new(), notes));
    }
    let f = spec.ambient.matrix();
    let checks = collect(points, |p| {
        let pt = BiSlantPoint::new(spec, p)?;
        let frame = pt.frame();
        let t = &pt.ops.t;
        let mut out = Vec::new();
        for (lx, xf) in pt.dists[roles.base].probes() {
            let x = &xf.coeffs;
            let xmu = mu.derivative(spec, p, x)?;
            let fx_tangent = frame.tangent_coeffs(&(f * frame.push(x)));
            let tx = t * x;
            for (lz, zf) in pt.dists[roles.fiber].probes() {
                let z = &zf.coeffs;
                let full = characterization_lhs(&pt, roles, x, z);
                let fz_normal = frame.normal_coeffs(&(f * frame.push(z)));
                let probe = format!("X={lx}, Z={lz}");
                let mut reduce = |on: bool, anchor, lhs: DVector<f64>, factor: f64| {
                    if !on {
                        return;
                    }
                    let rhs = z * (factor * xmu);
                    out.push(vector_check(&pt, suite, anchor, probe.clone(), &lhs, &rhs, tol::DIFFERENCED));
                    out.push(vector_check(&pt, suite, ANCHOR_CASE_CONSISTENCY, format!("{probe} ({anchor})"), &lhs, &full, tol::CONSISTENCY));
                };
                let tz = t * z;
                reduce(
                    case1,
                    ANCHOR_CASE_1,
                    pt.shape(&pt.omega(&tz), x) + pt.shape(&pt.omega(z), &fx_tangent),
                    pt.dists[roles.fiber].sin2(),
                );
                reduce(
                    case2,
                    ANCHOR_CASE_2,
                    pt.shape(&pt.omega(&tx), z) + pt.shape(&fz_normal, &tx),
                    pt.dists[roles.base].cos2,
                );
                reduce(case3, ANCHOR_CASE_3, pt.shape(&fz_normal, &fx_tangent), 1.0);
            }
        }
        Ok(out)
    })?;
    Ok(SuiteReport::new(suite, checks, notes))
}

/// Leaf geometry behind the warped-product criterion, with explicit roles
/// and potential.
pub fn foliation_with(spec: &ImmersionSpec, points: &[Vec<f64>], roles: WarpRoles, mu: &Potential) -> GeomResult<SuiteReport> {
    let suite = "foliation";
    let checks = collect(points, |p| {
        let pt = BiSlantPoint::new(spec, p)?;
        let (pb, pf) = (&pt.dists[roles.base].projector, &pt.dists[roles.fiber].projector);
        let mut out = Vec::new();
        let base = pt.dists[roles.base].probes();
        for (lx, x) in &base {
            for (ly, y) in &base {
                let nabla = pt.nabla(&x.coeffs, y);
                let normal_part = pf * &nabla;
                let r = pt.norm(&normal_part) / unit_floor(pt.norm(&nabla), 0.0);
                out.push(IdentityCheck::measured(
                    suite,
                    ANCHOR_TOTALLY_GEODESIC,
                    format!("X={lx}, Y={ly}"),
                    p,
                    pt.norm(&normal_part),
                    0.0,
                    r,
                    tol::DIFFERENCED,
                ));
            }
        }
        let grad = pb * pt.frame().raise(&mu.gradient(spec, p)?);
        let fiber = pt.dists[roles.fiber].probes();
        for (lz, z) in &fiber {
            for (lw, w) in &fiber {
                let lhs = pb * pt.nabla(&z.coeffs, w);
                let rhs = &grad * (-pt.g(&z.coeffs, &w.coeffs));
                out.push(vector_check(&pt, suite, ANCHOR_UMBILICAL, format!("Z={lz}, W={lw}"), &lhs, &rhs, tol::DIFFERENCED));
            }
        }
        out.extend(fiber_constant_checks(spec, &pt, roles, mu, suite)?);
        Ok(out)
    })?;
    Ok(SuiteReport::new(suite, checks, vec![mu.describe().to_string()]))
}

pub fn check_foliation_geometry(spec: &ImmersionSpec, points: &[Vec<f64>]) -> GeomResult<SuiteReport> {
    foliation_with(spec, points, warp_roles(spec)?, &Potential::for_spec(spec)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::SuiteStatus;
    use crate::immersion::{load_spec, sample_domain};

    const EX61: &str = "\
ambient 4 signature + + - -
chart u v w
domain u 0.2 3 ; v 0 6 ; w 0.5 2
map w*u*cos(v) , w*u*sin(v) , w*cos(v) , w*sin(v)
dist D1 = du , dw
dist D2 = dv
claim warped base D1 fiber D2 f sqrt(w^2*(1+u^2))
";

    fn sample(spec: &ImmersionSpec) -> Vec<Vec<f64>> {
        sample_domain(spec, 8, 3).unwrap().points
    }

    #[test]
    fn warp_connection_on_ex61() {
        let spec = load_spec(EX61).unwrap();
        let r = check_warp_connection(&spec, &sample(&spec)).unwrap();
        assert_eq!(r.status, SuiteStatus::Pass, "{:?}", r.max_residual);
    }

    #[test]
    fn symmetric_sigma_and_shape_identity_on_ex61() {
        let spec = load_spec(EX61).unwrap();
        let pts = sample(&spec);
        assert!(check_lemma_4_3(&spec, &pts).unwrap().passed());
        let t = check_theorem_4_4(&spec, &pts).unwrap();
        assert!(t.passed(), "{:?}", t.max_residual);
    }

    #[test]
    fn slant_derivative_identities_off_by_two() {
        let spec = load_spec(EX61).unwrap();
        let pts = sample(&spec);
        for r in [check_lemma_4_1(&spec, &pts).unwrap(), check_lemma_4_2(&spec, &pts).unwrap()] {
            assert_eq!(r.status, SuiteStatus::Fail);
            let note = r.notes.iter().find(|n| n.starts_with("median")).unwrap();
            let ratio: f64 = note.rsplit(' ').next().unwrap().parse().unwrap();
            assert!((ratio - 0.5).abs() < 1e-4, "{note}");
        }
    }

    #[test]
    fn characterization_case_one_and_leaves() {
        let spec = load_spec(EX61).unwrap();
        let pts = sample(&spec);
        assert!(check_characterization(&spec, &pts).unwrap().passed());
        let cases = check_special_cases(&spec, &pts).unwrap();
        assert!(cases.passed());
        assert!(cases.checks.iter().all(|c| c.anchor == ANCHOR_CASE_1 || c.anchor == ANCHOR_CASE_CONSISTENCY));
        assert!(check_foliation_geometry(&spec, &pts).unwrap().passed());
    }

    #[test]
    fn no_potential_is_an_error() {
        let text = EX61.lines().filter(|l| !l.starts_with("claim")).collect::<Vec<_>>().join("\n");
        let spec = load_spec(&text).unwrap();
        assert!(check_characterization(&spec, &[vec![1.0, 1.0, 1.0]]).is_err());
    }
}
