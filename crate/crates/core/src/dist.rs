//! Distribution projectors, the bi-slant axioms, integrability, and the
//! mixed-connection identities for a pair of slant distributions.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::check::{unit_floor, IdentityCheck, SuiteReport};
use crate::conn::SecondFundamental;
use crate::error::{GeomError, GeomResult};
use crate::immersion::{geometry_at, FieldAt, Frame, ImmersionSpec, PointGeometry};
use crate::structops::{mean_cos2, pointwise_ops, projector, slant_function, PointwiseOps, SlantClass, SlantProfile, DEFAULT_PROBES};
use crate::tol;

/// A declared distribution evaluated at one point.
#[derive(Clone, Debug)]
pub struct DistributionAt {
    pub name: String,
    /// Field values with their first derivatives, in declaration order.
    pub fields: Vec<FieldAt>,
    pub labels: Vec<String>,
    /// k × r matrix of field coefficients.
    pub basis: DMatrix<f64>,
    /// g-orthogonal projector onto the span.
    pub projector: DMatrix<f64>,
    /// Mean `cos²θ` over the distribution.
    pub cos2: f64,
}

impl DistributionAt {
    pub fn rank(&self) -> usize {
        self.fields.len()
    }

    pub fn sin2(&self) -> f64 {
        1.0 - self.cos2
    }

    /// `θ` recovered from `cos²θ`.
    pub fn angle(&self) -> f64 {
        self.cos2.clamp(0.0, 1.0).sqrt().acos()
    }

    /// Basis fields followed by their pairwise sums.
    pub fn probes(&self) -> Vec<(String, FieldAt)> {
        let mut out: Vec<(String, FieldAt)> = self
            .labels
            .iter()
            .cloned()
            .zip(self.fields.iter().cloned())
            .collect();
        for i in 0..self.rank() {
            for j in i + 1..self.rank() {
                out.push((
                    format!("({})+({})", self.labels[i], self.labels[j]),
                    self.fields[i].sum(&self.fields[j]),
                ));
            }
        }
        out
    }
}

/// Everything the identity suites need at one chart point.
#[derive(Clone, Debug)]
pub struct BiSlantPoint {
    pub geom: PointGeometry,
    pub ops: PointwiseOps,
    pub sf: SecondFundamental,
    pub dists: Vec<DistributionAt>,
}

impl BiSlantPoint {
    pub fn new(spec: &ImmersionSpec, p: &[f64]) -> GeomResult<Self> {
        let geom = geometry_at(spec, p)?;
        let ops = pointwise_ops(&spec.ambient, &geom.frame);
        let sf = SecondFundamental::from_geometry(&geom);
        let mut dists = Vec::with_capacity(spec.distributions.len());
        for d in &spec.distributions {
            let fields = d.eval(p)?;
            let basis = DMatrix::from_columns(&fields.iter().map(|f| f.coeffs.clone()).collect::<Vec<_>>());
            let projector = projector(&geom.frame, &basis).map_err(|_| GeomError::DependentDistribution {
                name: d.name.clone(),
                point: p.to_vec(),
            })?;
            let cos2 = mean_cos2(&ops, &geom.frame, &basis)?;
            dists.push(DistributionAt {
                name: d.name.clone(),
                fields,
                labels: d.fields.iter().map(|f| f.text.clone()).collect(),
                basis,
                projector,
                cos2,
            });
        }
        Ok(Self { geom, ops, sf, dists })
    }

    pub fn frame(&self) -> &Frame {
        &self.geom.frame
    }

    pub fn point(&self) -> &[f64] {
        &self.geom.frame.point
    }

    pub fn g(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        self.frame().g(x, y)
    }

    pub fn norm(&self, x: &DVector<f64>) -> f64 {
        self.frame().norm(x)
    }

    /// `ωx` in normal-basis coordinates.
    pub fn omega(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.ops.w * x
    }

    pub fn sigma(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        self.sf.sigma(x, y)
    }

    /// `g(σ(x, y), ωz)`: normal inner product in the orthonormal basis.
    pub fn sigma_omega(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> f64 {
        self.sigma(x, y).dot(&self.omega(z))
    }

    pub fn nabla(&self, x: &DVector<f64>, y: &FieldAt) -> DVector<f64> {
        self.sf.nabla(x, y)
    }

    /// `Tᵢx = Pᵢ T x` for the distribution with index `i`.
    pub fn t_part(&self, i: usize, x: &DVector<f64>) -> DVector<f64> {
        &self.dists[i].projector * (&self.ops.t * x)
    }

    /// `A_N x` for `N` in normal-basis coordinates.
    pub fn shape(&self, n: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
        self.sf.shape_operator(self.frame(), n) * x
    }
}

/// `P₁`, `P₂` and `Tᵢ = Pᵢ T` at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct Projectors {
    pub p1: DMatrix<f64>,
    pub p2: DMatrix<f64>,
    pub t1: DMatrix<f64>,
    pub t2: DMatrix<f64>,
}

/// Largest normalised `|g(X, Z)|` over basis pairs of two distributions.
fn orthogonality(frame: &Frame, a: &DistributionAt, b: &DistributionAt) -> (f64, String, f64) {
    let mut worst = (0.0, String::new(), 0.0);
    for (i, x) in a.basis.column_iter().enumerate() {
        for (j, z) in b.basis.column_iter().enumerate() {
            let (x, z) = (x.clone_owned(), z.clone_owned());
            let value = frame.g(&x, &z);
            let r = value.abs() / (frame.norm(&x) * frame.norm(&z));
            if r > worst.0 {
                worst = (r, format!("g({}, {})", a.labels[i], b.labels[j]), value);
            }
        }
    }
    worst
}

pub fn projectors_at(spec: &ImmersionSpec, p: &[f64]) -> GeomResult<Projectors> {
    if spec.distributions.is_empty() {
        return Err(GeomError::Precondition("no distributions declared".into()));
    }
    let pt = BiSlantPoint::new(spec, p)?;
    let k = spec.dim();
    let id = DMatrix::<f64>::identity(k, k);
    let p1 = pt.dists[0].projector.clone();
    let p2 = match pt.dists.get(1) {
        Some(d2) => {
            let (r, witness, value) = orthogonality(pt.frame(), &pt.dists[0], d2);
            if r > tol::AXIOM {
                return Err(GeomError::NotOrthogonal {
                    first: pt.dists[0].name.clone(),
                    second: d2.name.clone(),
                    witness,
                    value,
                    point: p.to_vec(),
                });
            }
            d2.projector.clone()
        }
        None => &id - &p1,
    };
    let t1 = &p1 * &pt.ops.t;
    let t2 = &p2 * &pt.ops.t;
    Ok(Projectors { p1, p2, t1, t2 })
}

/// A named pair of fields and the value that violates an axiom.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub pair: String,
    pub point: Vec<f64>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomReport {
    pub points: usize,
    pub dim: usize,
    pub combined_rank: usize,
    /// Largest normalised `|g(X, Z)|`, X ∈ D₁, Z ∈ D₂.
    pub orthogonality_residual: f64,
    pub orthogonality_witness: Option<Witness>,
    /// Largest normalised `|g(FX, Z)|` or `|g(FZ, X)|`.
    pub mixing_residual: f64,
    pub mixing_witness: Option<Witness>,
    /// `‖(I - Pᵢ) T Pᵢ‖` per distribution.
    pub invariance_residual: Vec<f64>,
    pub slant: Vec<SlantProfile>,
    pub axiom_a: bool,
    pub axiom_b: bool,
    pub axiom_c: bool,
    pub invariance: bool,
    pub bislant: bool,
    pub proper: bool,
    pub summary: String,
}

struct PointAxioms {
    orth: (f64, String, f64),
    mixing: (f64, String, f64),
    invariance: Vec<f64>,
}

fn axioms_at(spec: &ImmersionSpec, p: &[f64]) -> GeomResult<PointAxioms> {
    let pt = BiSlantPoint::new(spec, p)?;
    let frame = pt.frame();
    let (d1, d2) = (&pt.dists[0], &pt.dists[1]);
    let orth = orthogonality(frame, d1, d2);
    let fj = spec.ambient.matrix() * &frame.jacobian;
    // g(F·J x, J z) = xᵀ (Jᵀ F J) z
    let mixed = frame.jacobian.transpose() * fj;
    let mut mixing = (0.0, String::new(), 0.0);
    for (a, b) in [(d1, d2), (d2, d1)] {
        for (i, x) in a.basis.column_iter().enumerate() {
            for (j, z) in b.basis.column_iter().enumerate() {
                let (x, z) = (x.clone_owned(), z.clone_owned());
                let value = (x.transpose() * &mixed * &z)[(0, 0)];
                let r = value.abs() / (frame.norm(&x) * frame.norm(&z));
                if r > mixing.0 {
                    mixing = (r, format!("g(F·{}, {})", a.labels[i], b.labels[j]), value);
                }
            }
        }
    }
    let k = spec.dim();
    let id = DMatrix::<f64>::identity(k, k);
    let invariance = pt
        .dists
        .iter()
        .map(|d| ((&id - &d.projector) * &pt.ops.t * &d.projector).amax())
        .collect();
    Ok(PointAxioms { orth, mixing, invariance })
}

fn near_endpoint(theta: f64) -> bool {
    !(tol::SLANT_SPREAD..=FRAC_PI_2 - tol::SLANT_SPREAD).contains(&theta)
}

/// Definition checks for a pair of distributions: direct sum, F-mixing,
/// slant-ness and `T(Dᵢ) ⊂ Dᵢ`.
pub fn check_bislant_axioms(spec: &ImmersionSpec, points: &[Vec<f64>]) -> GeomResult<AxiomReport> {
    if spec.distributions.len() != 2 {
        return Err(GeomError::Precondition(format!(
            "the bi-slant axioms need two distributions, {} declared",
            spec.distributions.len()
        )));
    }
    let per_point = points
        .par_iter()
        .map(|p| axioms_at(spec, p))
        .collect::<GeomResult<Vec<_>>>()?;

    let mut orth = (0.0, None);
    let mut mixing = (0.0, None);
    let mut invariance = vec![0.0_f64; 2];
    for (p, a) in points.iter().zip(&per_point) {
        if a.orth.0 > orth.0 {
            orth = (a.orth.0, Some(Witness { pair: a.orth.1.clone(), point: p.clone(), value: a.orth.2 }));
        }
        if a.mixing.0 > mixing.0 {
            mixing = (a.mixing.0, Some(Witness { pair: a.mixing.1.clone(), point: p.clone(), value: a.mixing.2 }));
        }
        for (m, v) in invariance.iter_mut().zip(&a.invariance) {
            *m = m.max(*v);
        }
    }

    let slant = spec
        .distributions
        .iter()
        .map(|d| slant_function(spec, &d.name, points, DEFAULT_PROBES))
        .collect::<GeomResult<Vec<_>>>()?;

    let combined_rank: usize = spec.distributions.iter().map(|d| d.rank()).sum();
    let dim = spec.dim();
    let axiom_a = combined_rank == dim && orth.0 < tol::AXIOM;
    let axiom_b = mixing.0 < tol::AXIOM;
    let axiom_c = slant.iter().all(|s| s.class.is_slant());
    let inv_ok = invariance.iter().all(|r| *r < tol::AXIOM);
    let bislant = axiom_a && axiom_b && axiom_c;
    let proper = bislant
        && slant.iter().all(|s| {
            matches!(s.class, SlantClass::PointwiseSlant | SlantClass::SlantConstant)
                && s.samples.iter().all(|x| !near_endpoint(x.mean))
        });

    let (n1, n2) = (&spec.distributions[0].name, &spec.distributions[1].name);
    let (c1, c2) = (slant[0].class, slant[1].class);
    let summary = if !bislant {
        let failed: Vec<&str> = [(axiom_a, "(a)"), (axiom_b, "(b)"), (axiom_c, "(c)")]
            .iter()
            .filter(|(ok, _)| !ok)
            .map(|(_, n)| *n)
            .collect();
        format!("not bi-slant: axiom {} fails", failed.join(", "))
    } else if proper {
        "proper pointwise bi-slant".to_string()
    } else {
        match (c1, c2) {
            (SlantClass::Invariant, SlantClass::AntiInvariant) => format!("CR form: {n1} invariant, {n2} anti-invariant"),
            (SlantClass::Invariant, SlantClass::Invariant) => "invariant: both distributions have θ = 0".to_string(),
            (SlantClass::AntiInvariant, SlantClass::AntiInvariant) => "anti-invariant: both distributions have θ = π/2".to_string(),
            (SlantClass::Invariant, _) => format!("bi-slant with θ({n1}) = 0 (semi-slant form)"),
            (_, SlantClass::Invariant) => format!("bi-slant with θ({n2}) = 0 (semi-slant form)"),
            (_, SlantClass::AntiInvariant) => format!("bi-slant with θ({n2}) = π/2 (hemi-slant form)"),
            (SlantClass::AntiInvariant, _) => format!("bi-slant with θ({n1}) = π/2 (hemi-slant form)"),
            _ => "bi-slant, not proper (a slant function reaches 0 or π/2)".to_string(),
        }
    };

    Ok(AxiomReport {
        points: points.len(),
        dim,
        combined_rank,
        orthogonality_residual: orth.0,
        orthogonality_witness: orth.1.filter(|_| orth.0 >= tol::AXIOM),
        mixing_residual: mixing.0,
        mixing_witness: mixing.1.filter(|_| mixing.0 >= tol::AXIOM),
        invariance_residual: invariance,
        slant,
        axiom_a,
        axiom_b,
        axiom_c,
        invariance: inv_ok,
        bislant,
        proper,
        summary,
    })
}

pub const ANCHOR_AXIOM_A: &str = "(a) TM = D_1 ⊕ D_2";
pub const ANCHOR_AXIOM_B: &str = "(b) JD_1 ⊥ D_2 and JD_2 ⊥ D_1";
pub const ANCHOR_AXIOM_C: &str = "(c) The distributions D_1, D_2 are pointwise slant";
pub const ANCHOR_INVARIANCE: &str = "T(D_i) ⊂ D_i";

impl AxiomReport {
    /// The axiom verdicts as identity records, one per axiom and
    /// distribution, located at the worst point.
    pub fn to_suite(&self) -> SuiteReport {
        let suite = "axioms";
        let at = |w: &Option<Witness>| w.as_ref().map(|w| w.point.clone()).unwrap_or_default();
        let rank_gap = self.dim.abs_diff(self.combined_rank) as f64;
        let mut checks = vec![
            IdentityCheck::measured(
                suite,
                ANCHOR_AXIOM_A,
                format!("rank {} of {}", self.combined_rank, self.dim),
                &at(&self.orthogonality_witness),
                self.orthogonality_residual,
                0.0,
                self.orthogonality_residual + rank_gap,
                tol::AXIOM,
            ),
            IdentityCheck::measured(
                suite,
                ANCHOR_AXIOM_B,
                self.mixing_witness.as_ref().map(|w| w.pair.clone()).unwrap_or_default(),
                &at(&self.mixing_witness),
                self.mixing_residual,
                0.0,
                self.mixing_residual,
                tol::AXIOM,
            ),
        ];
        for (s, inv) in self.slant.iter().zip(&self.invariance_residual) {
            checks.push(IdentityCheck::measured(
                suite,
                ANCHOR_AXIOM_C,
                format!("{}: {}", s.distribution, s.class.as_str()),
                &[],
                s.max_spread,
                0.0,
                s.max_spread,
                tol::SLANT_SPREAD,
            ));
            checks.push(IdentityCheck::measured(suite, ANCHOR_INVARIANCE, s.distribution.clone(), &[], *inv, 0.0, *inv, tol::AXIOM));
        }
        SuiteReport::new(suite, checks, vec![self.summary.clone()])
    }
}

pub const ANCHOR_BRACKET: &str = "[X,Z] ∈ D";

/// Bracket residuals `‖(I - P)[X, Z]‖_g` over basis-field pairs.
pub fn integrability(spec: &ImmersionSpec, dist: &str, points: &[Vec<f64>]) -> GeomResult<SuiteReport> {
    let idx = spec.distribution_index(dist)?;
    let d = &spec.distributions[idx];
    let suite = "integrability";
    if d.rank() < 2 {
        let checks = points
            .iter()
            .map(|p| IdentityCheck::measured(suite, ANCHOR_BRACKET, format!("{dist}: rank 1"), p, 0.0, 0.0, 0.0, tol::INTEGRABILITY))
            .collect();
        return Ok(SuiteReport::new(suite, checks, vec![format!("{dist} has rank 1: trivially integrable")]));
    }
    let k = spec.dim();
    let checks = points
        .par_iter()
        .map(|p| {
            let pt = BiSlantPoint::new(spec, p)?;
            let da = &pt.dists[idx];
            let comp = DMatrix::<f64>::identity(k, k) - &da.projector;
            let mut out = Vec::new();
            for i in 0..da.rank() {
                for j in i + 1..da.rank() {
                    let (x, z) = (&da.fields[i], &da.fields[j]);
                    let bracket = z.derivative_along(&x.coeffs) - x.derivative_along(&z.coeffs);
                    let normal_part = &comp * &bracket;
                    let r = pt.norm(&normal_part);
                    out.push(IdentityCheck::measured(
                        suite,
                        ANCHOR_BRACKET,
                        format!("{dist}: [{}, {}]", da.labels[i], da.labels[j]),
                        p,
                        pt.norm(&bracket),
                        pt.norm(&(&da.projector * &bracket)),
                        r,
                        tol::INTEGRABILITY,
                    ));
                }
            }
            Ok(out)
        })
        .collect::<GeomResult<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(SuiteReport::new(suite, checks, Vec::new()))
}

/// Integrability of every declared distribution, merged into one report.
pub fn check_integrability(spec: &ImmersionSpec, points: &[Vec<f64>]) -> GeomResult<SuiteReport> {
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    for d in &spec.distributions {
        let r = integrability(spec, &d.name, points)?;
        checks.extend(r.checks);
        notes.extend(r.notes);
    }
    Ok(SuiteReport::new("integrability", checks, notes))
}

pub const ANCHOR_LEMMA_3_2_I: &str = "(sin²θ_2 − sin²θ_1)g(∇_X Y, Z) = g{(σ(X,Z), ωT_1Y) + (σ(X,T_2Z), ωY)} + g{(σ(X,Y), ωT_2Z) + (σ(X,T_1Y), ωZ)}";
pub const ANCHOR_LEMMA_3_2_II: &str = "(sin²θ_1 − sin²θ_2)g(∇_Z W, X) = g{(σ(X,Z), ωT_2W) + (σ(Z,T_1X), ωW)} + g{(σ(Z,W), ωT_1X) + (σ(Z,T_2W), ωX)}";
pub const ANCHOR_COROLLARY_3_3: &str = "sin²θ g(∇_XY,Z) = g(σ(X,Y), ωTZ) + g(σ(X,FY), ωZ)";
pub const ANCHOR_COROLLARY_CONSISTENCY: &str = "corollary right side = lemma (i) right side at θ_1 = 0";

/// Both sides of the first mixed identity for `X, Y ∈ D_a`, `Z ∈ D_b`.
pub fn lemma_3_2_i_sides(pt: &BiSlantPoint, a: usize, b: usize, x: &FieldAt, y: &FieldAt, z: &FieldAt) -> (f64, f64) {
    let (x, yc, zc) = (&x.coeffs, &y.coeffs, &z.coeffs);
    let lhs = (pt.dists[b].sin2() - pt.dists[a].sin2()) * pt.g(&pt.nabla(x, y), zc);
    let t1y = pt.t_part(a, yc);
    let t2z = pt.t_part(b, zc);
    let rhs = pt.sigma_omega(x, zc, &t1y)
        + pt.sigma_omega(x, &t2z, yc)
        + pt.sigma_omega(x, yc, &t2z)
        + pt.sigma_omega(x, &t1y, zc);
    (lhs, rhs)
}

/// Both sides of the second mixed identity for `X ∈ D_a`, `Z, W ∈ D_b`.
pub fn lemma_3_2_ii_sides(pt: &BiSlantPoint, a: usize, b: usize, x: &FieldAt, z: &FieldAt, w: &FieldAt) -> (f64, f64) {
    let (xc, zc, wc) = (&x.coeffs, &z.coeffs, &w.coeffs);
    let lhs = (pt.dists[a].sin2() - pt.dists[b].sin2()) * pt.g(&pt.nabla(zc, w), xc);
    let t2w = pt.t_part(b, wc);
    let t1x = pt.t_part(a, xc);
    let rhs = pt.sigma_omega(xc, zc, &t2w)
        + pt.sigma_omega(zc, &t1x, wc)
        + pt.sigma_omega(zc, wc, &t1x)
        + pt.sigma_omega(zc, &t2w, xc);
    (lhs, rhs)
}

fn require_two(spec: &ImmersionSpec) -> GeomResult<()> {
    if spec.distributions.len() == 2 {
        Ok(())
    } else {
        Err(GeomError::Precondition(format!(
            "this suite needs two distributions, {} declared",
            spec.distributions.len()
        )))
    }
}

/// The mixed identities with the declared distributions as `D_1`, `D_2`.
pub fn check_lemma_3_2(spec: &ImmersionSpec, points: &[Vec<f64>]) -> GeomResult<SuiteReport> {
    let suite = "lemma3.2";
    require_two(spec)?;
    let per_point = points
        .par_iter()
        .map(|p| {
            let pt = BiSlantPoint::new(spec, p)?;
            let gap = (pt.dists[1].sin2() - pt.dists[0].sin2()).abs();
            if gap < tol::ANGLE_GAP {
                let reason = format!("|sin²θ_2 − sin²θ_1| = {gap:.3e} below {:e}", tol::ANGLE_GAP);
                return Ok(vec![
                    IdentityCheck::skipped(suite, ANCHOR_LEMMA_3_2_I, "", p, tol::LEMMA, reason.clone()),
                    IdentityCheck::skipped(suite, ANCHOR_LEMMA_3_2_II, "", p, tol::LEMMA, reason),
                ]);
            }
            let (p1, p2) = (pt.dists[0].probes(), pt.dists[1].probes());
            let mut out = Vec::new();
            for (lx, x) in &p1 {
                for (ly, y) in &p1 {
                    for (lz, z) in &p2 {
                        let (lhs, rhs) = lemma_3_2_i_sides(&pt, 0, 1, x, y, z);
                        let probe = format!("X={lx}, Y={ly}, Z={lz}");
                        out.push(IdentityCheck::scalar(suite, ANCHOR_LEMMA_3_2_I, probe, p, lhs, rhs, unit_floor(lhs, rhs), tol::LEMMA));
                    }
                }
            }
            for (lx, x) in &p1 {
                for (lz, z) in &p2 {
                    for (lw, w) in &p2 {
                        let (lhs, rhs) = lemma_3_2_ii_sides(&pt, 0, 1, x, z, w);
                        let probe = format!("X={lx}, Z={lz}, W={lw}");
                        out.push(IdentityCheck::scalar(suite, ANCHOR_LEMMA_3_2_II, probe, p, lhs, rhs, unit_floor(lhs, rhs), tol::LEMMA));
                    }
                }
            }
            Ok(out)
        })
        .collect::<GeomResult<Vec<_>>>()?;
    let checks: Vec<IdentityCheck> = per_point.into_iter().flatten().collect();
    let mut notes = Vec::new();
    let skipped_points = checks.iter().filter(|c| c.is_skipped()).count() / 2;
    if skipped_points > 0 {
        notes.push(format!("{skipped_points} points skipped: slant functions too close"));
    }
    if !checks.is_empty() && checks.iter().all(|c| c.is_skipped()) {
        notes.push("lemma vacuous on this spec: θ_1 and θ_2 coincide at every sample point".into());
    }
    Ok(SuiteReport::new(suite, checks, notes))
}

/// The semi-slant reduction, applicable when the first distribution is
/// invariant. Also cross-checks against the general identity at `θ_1 = 0`.
pub fn check_corollary_3_3(spec: &ImmersionSpec, points: &[Vec<f64>]) -> GeomResult<SuiteReport> {
    let suite = "cor3.3";
    require_two(spec)?;
    let first = &spec.distributions[0].name;
    let profile = slant_function(spec, first, points, DEFAULT_PROBES)?;
    if profile.class != SlantClass::Invariant {
        return Ok(SuiteReport::inapplicable(
            suite,
            format!("{first} is {}, not invariant", profile.class.as_str()),
        ));
    }
    let per_point = points
        .par_iter()
        .map(|p| {
            let pt = BiSlantPoint::new(spec, p)?;
            let sin2 = pt.dists[1].sin2();
            if sin2 < tol::ANGLE_GAP {
                let reason = format!("sin²θ = {sin2:.3e}: second distribution invariant here");
                return Ok(vec![IdentityCheck::skipped(suite, ANCHOR_COROLLARY_3_3, "", p, tol::LEMMA, reason)]);
            }
            let mut out = Vec::new();
            let f = spec.ambient.matrix();
            for (lx, x) in &pt.dists[0].probes() {
                for (ly, y) in &pt.dists[0].probes() {
                    for (lz, z) in &pt.dists[1].probes() {
                        let (xc, yc, zc) = (&x.coeffs, &y.coeffs, &z.coeffs);
                        let lhs = sin2 * pt.g(&pt.nabla(xc, y), zc);
                        let tz = &pt.ops.t * zc;
                        // FY is tangent for invariant Y; take its tangent coordinates
                        let fy = pt.frame().tangent_coeffs(&(f * pt.frame().push(yc)));
                        let rhs = pt.sigma_omega(xc, yc, &tz) + pt.sigma_omega(xc, &fy, zc);
                        let probe = format!("X={lx}, Y={ly}, Z={lz}");
                        out.push(IdentityCheck::scalar(suite, ANCHOR_COROLLARY_3_3, probe.clone(), p, lhs, rhs, unit_floor(lhs, rhs), tol::LEMMA));
                        let (_, general) = lemma_3_2_i_sides(&pt, 0, 1, x, y, z);
                        out.push(IdentityCheck::scalar(
                            suite,
                            ANCHOR_COROLLARY_CONSISTENCY,
                            probe,
                            p,
                            rhs,
                            general,
                            unit_floor(rhs, general),
                            tol::CONSISTENCY,
                        ));
                    }
                }
            }
            Ok(out)
        })
        .collect::<GeomResult<Vec<_>>>()?;
    Ok(SuiteReport::new(suite, per_point.into_iter().flatten().collect(), Vec::new()))
}
