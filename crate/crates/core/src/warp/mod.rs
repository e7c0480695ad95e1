//! Warped-product detection on coordinate-aligned splits, recovery of the
//! warping function, and the identities that hold on a warped product.

mod suites;

pub use suites::*;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::dist::Witness;
use crate::error::{GeomError, GeomResult};
use crate::expr::Expr;
use crate::immersion::{frame_at, Frame, ImmersionSpec};
use crate::tol;

/// Which declared distribution plays the base (index 1 in the identities)
/// and which the fiber (index 2).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WarpRoles {
    pub base: usize,
    pub fiber: usize,
}

/// Base and fiber from the warped claim, else the declaration order.
pub fn warp_roles(spec: &ImmersionSpec) -> GeomResult<WarpRoles> {
    if spec.distributions.len() != 2 {
        return Err(GeomError::Precondition(format!(
            "a warped split needs two distributions, {} declared",
            spec.distributions.len()
        )));
    }
    match &spec.claims.warped {
        Some(c) => Ok(WarpRoles {
            base: spec.distribution_index(&c.base)?,
            fiber: spec.distribution_index(&c.fiber)?,
        }),
        None => Ok(WarpRoles { base: 0, fiber: 1 }),
    }
}

fn is_zero(e: &Expr, k: usize) -> bool {
    e.is_constant() && e.eval(&vec![0.0; k]).map(|v| v == 0.0).unwrap_or(false)
}

/// Chart coordinates a distribution's fields can have components along.
pub fn coordinate_support(spec: &ImmersionSpec, dist: usize) -> Vec<usize> {
    let k = spec.dim();
    (0..k)
        .filter(|&i| spec.distributions[dist].fields.iter().any(|f| !is_zero(&f.coeffs[i], k)))
        .collect()
}

/// Base and fiber coordinate sets when each distribution lives on its own
/// block of coordinates, one coordinate per rank.
pub fn aligned_coordinates(spec: &ImmersionSpec, roles: WarpRoles) -> Option<(Vec<usize>, Vec<usize>)> {
    let b = coordinate_support(spec, roles.base);
    let f = coordinate_support(spec, roles.fiber);
    let aligned = b.len() == spec.distributions[roles.base].rank()
        && f.len() == spec.distributions[roles.fiber].rank()
        && b.iter().all(|i| !f.contains(i));
    aligned.then_some((b, f))
}

/// `ln f` up to an additive constant: `½ ln g(Z, Z)` for the first fiber
/// coordinate field, or the first declared fiber field on a non-aligned
/// split.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LogWarp {
    Coordinate(usize),
    Field(usize),
}

impl LogWarp {
    pub fn for_spec(spec: &ImmersionSpec, roles: WarpRoles) -> Self {
        match aligned_coordinates(spec, roles) {
            Some((_, fiber)) => LogWarp::Coordinate(fiber[0]),
            None => LogWarp::Field(roles.fiber),
        }
    }

    fn value_in(&self, spec: &ImmersionSpec, frame: &Frame) -> GeomResult<f64> {
        let gzz = match *self {
            LogWarp::Coordinate(i) => frame.gram[(i, i)],
            LogWarp::Field(d) => {
                let z = spec.distributions[d].eval(&frame.point)?.swap_remove(0).coeffs;
                frame.g(&z, &z)
            }
        };
        Ok(0.5 * gzz.ln())
    }

    pub fn value(&self, spec: &ImmersionSpec, q: &[f64]) -> GeomResult<f64> {
        self.value_in(spec, &frame_at(spec, q)?)
    }

    /// `v(ln f)` by central differences.
    pub fn derivative(&self, spec: &ImmersionSpec, p: &[f64], v: &DVector<f64>) -> GeomResult<f64> {
        central_difference(p, v, |q| self.value(spec, q))
    }
}

/// `(φ(p + h v) − φ(p − h v)) / 2h` with the shared step.
pub(crate) fn central_difference(
    p: &[f64],
    v: &DVector<f64>,
    phi: impl Fn(&[f64]) -> GeomResult<f64>,
) -> GeomResult<f64> {
    let h = tol::FD_STEP;
    if v.iter().all(|c| *c == 0.0) {
        return Ok(0.0);
    }
    let plus: Vec<f64> = p.iter().zip(v.iter()).map(|(a, b)| a + h * b).collect();
    let minus: Vec<f64> = p.iter().zip(v.iter()).map(|(a, b)| a - h * b).collect();
    Ok((phi(&plus)? - phi(&minus)?) / (2.0 * h))
}

/// The potential μ of the characterization: the `mu` expression when the
/// spec has one, otherwise the recovered `ln f`.
#[derive(Clone, Debug, PartialEq)]
pub enum Potential {
    Expr(Expr),
    Recovered(LogWarp),
}

impl Potential {
    pub fn for_spec(spec: &ImmersionSpec) -> GeomResult<Self> {
        if let Some(mu) = &spec.mu {
            return Ok(Potential::Expr(mu.clone()));
        }
        if spec.claims.warped.is_some() {
            let roles = warp_roles(spec)?;
            return Ok(Potential::Recovered(LogWarp::for_spec(spec, roles)));
        }
        Err(GeomError::Precondition("characterization requires μ or warped claim".into()))
    }

    pub fn describe(&self) -> &'static str {
        match self {
            Potential::Expr(_) => "μ from the spec's mu expression (exact derivatives)",
            Potential::Recovered(_) => "μ = recovered ln f (central differences)",
        }
    }

    pub fn gradient(&self, spec: &ImmersionSpec, p: &[f64]) -> GeomResult<DVector<f64>> {
        match self {
            Potential::Expr(e) => e.eval_jet2(p).map(|j| j.grad).map_err(|source| GeomError::Eval {
                what: "mu".into(),
                point: p.to_vec(),
                source,
            }),
            Potential::Recovered(lw) => {
                let k = spec.dim();
                let mut out = DVector::zeros(k);
                for i in 0..k {
                    out[i] = lw.derivative(spec, p, &DVector::from_fn(k, |j, _| if i == j { 1.0 } else { 0.0 }))?;
                }
                Ok(out)
            }
        }
    }

    pub fn derivative(&self, spec: &ImmersionSpec, p: &[f64], v: &DVector<f64>) -> GeomResult<f64> {
        match self {
            Potential::Expr(_) => Ok(self.gradient(spec, p)?.dot(v)),
            Potential::Recovered(lw) => lw.derivative(spec, p, v),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WarpVerdict {
    Warped,
    /// Warped with constant f: a Riemannian product.
    TrivialWarpedProduct,
    /// Distributions are not spanned by disjoint coordinate blocks.
    NotCoordinateAligned,
    NotAnOrthogonalSplit,
    NotWarped,
}

impl WarpVerdict {
    pub fn is_warped(self) -> bool {
        matches!(self, WarpVerdict::Warped | WarpVerdict::TrivialWarpedProduct)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            WarpVerdict::Warped => "warped product",
            WarpVerdict::TrivialWarpedProduct => "trivial warped product",
            WarpVerdict::NotCoordinateAligned => "not coordinate-aligned",
            WarpVerdict::NotAnOrthogonalSplit => "not an orthogonal split",
            WarpVerdict::NotWarped => "not warped",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WarpSample {
    pub point: Vec<f64>,
    /// Recovered f, normalised to 1 at the reference point.
    pub f: f64,
}

/// Measured base block of the metric at one point, rows and columns in
/// base-coordinate order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaseMetricSample {
    pub point: Vec<f64>,
    pub block: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WarpClaimCheck {
    pub claim: String,
    /// Mean of `f_claim² / f²`: the constant absorbed into the fiber metric.
    pub scale: f64,
    /// Variance of that ratio divided by its squared mean.
    pub ratio_variance: f64,
    pub threshold: f64,
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WarpedReport {
    pub base: String,
    pub fiber: String,
    pub base_coordinates: Vec<String>,
    pub fiber_coordinates: Vec<String>,
    pub reference_point: Vec<f64>,
    /// Max normalised `|g(∂_b, ∂_f)|` over base/fiber coordinate pairs.
    pub cross_residual: Option<f64>,
    pub cross_witness: Option<Witness>,
    /// Max differenced variation of the base block along fiber coordinates.
    pub base_dependence_residual: Option<f64>,
    /// `max|G_F(p) − f²(p) G_F(ref)| / max|G_F(p)|`.
    pub fiber_conformal_residual: Option<f64>,
    /// Disagreement of f recovered from the individual fiber fields.
    pub field_consistency_residual: Option<f64>,
    /// Max `|∂(ln f)|` along fiber coordinates.
    pub fiber_variation_residual: Option<f64>,
    pub f_samples: Vec<WarpSample>,
    /// `(max f − min f) / max f` over the sample.
    pub f_relative_variation: Option<f64>,
    pub base_metric: Vec<BaseMetricSample>,
    pub claim: Option<WarpClaimCheck>,
    pub connection_residual: Option<f64>,
    pub base_geodesic_residual: Option<f64>,
    pub fiber_umbilic_residual: Option<f64>,
    pub verdict: WarpVerdict,
    pub notes: Vec<String>,
}

impl WarpedReport {
    /// Warped, and every residual that was computed is below its threshold.
    pub fn passed(&self) -> bool {
        let below = |r: Option<f64>, t: f64| r.is_none_or(|r| r < t);
        self.verdict.is_warped()
            && below(self.connection_residual, tol::DIFFERENCED)
            && below(self.base_geodesic_residual, tol::DIFFERENCED)
            && below(self.fiber_umbilic_residual, tol::DIFFERENCED)
    }

    fn unaligned(spec: &ImmersionSpec, roles: WarpRoles, points: &[Vec<f64>]) -> Self {
        Self {
            base: spec.distributions[roles.base].name.clone(),
            fiber: spec.distributions[roles.fiber].name.clone(),
            base_coordinates: Vec::new(),
            fiber_coordinates: Vec::new(),
            reference_point: points.first().cloned().unwrap_or_default(),
            cross_residual: None,
            cross_witness: None,
            base_dependence_residual: None,
            fiber_conformal_residual: None,
            field_consistency_residual: None,
            fiber_variation_residual: None,
            f_samples: Vec::new(),
            f_relative_variation: None,
            base_metric: Vec::new(),
            claim: None,
            connection_residual: None,
            base_geodesic_residual: None,
            fiber_umbilic_residual: None,
            verdict: WarpVerdict::NotCoordinateAligned,
            notes: vec!["warped detection needs each distribution spanned by its own block of chart coordinates".into()],
        }
    }
}

struct PointWarp {
    cross: (f64, String, f64),
    base_dependence: f64,
    fiber_variation: f64,
    gzz: f64,
    fiber_block: DMatrix<f64>,
    field_norms: Vec<f64>,
    base_block: DMatrix<f64>,
}

fn block(g: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| g[(rows[i], cols[j])])
}

fn unit(k: usize, i: usize) -> Vec<f64> {
    (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect()
}

fn warp_at(spec: &ImmersionSpec, roles: WarpRoles, base: &[usize], fiber: &[usize], p: &[f64]) -> GeomResult<PointWarp> {
    let k = spec.dim();
    let frame = frame_at(spec, p)?;
    let g = &frame.gram;
    let mut cross = (0.0, String::new(), 0.0);
    for &b in base {
        for &f in fiber {
            let value = g[(b, f)];
            let r = value.abs() / (g[(b, b)] * g[(f, f)]).sqrt();
            if r > cross.0 {
                cross = (r, format!("g(∂{}, ∂{})", spec.chart[b], spec.chart[f]), value);
            }
        }
    }
    let base_block = block(g, base, base);
    let scale = base_block.amax().max(1.0);
    let h = tol::FD_STEP;
    let mut base_dependence = 0.0_f64;
    let mut fiber_variation = 0.0_f64;
    let lw = LogWarp::Coordinate(fiber[0]);
    for &c in fiber {
        let e = unit(k, c);
        let plus: Vec<f64> = p.iter().zip(&e).map(|(a, b)| a + h * b).collect();
        let minus: Vec<f64> = p.iter().zip(&e).map(|(a, b)| a - h * b).collect();
        let (fp, fm) = (frame_at(spec, &plus)?, frame_at(spec, &minus)?);
        let d = (block(&fp.gram, base, base) - block(&fm.gram, base, base)) / (2.0 * h);
        base_dependence = base_dependence.max(d.amax() / scale);
        let dl = (lw.value_in(spec, &fp)? - lw.value_in(spec, &fm)?) / (2.0 * h);
        fiber_variation = fiber_variation.max(dl.abs());
    }
    let field_norms = spec.distributions[roles.fiber]
        .eval(p)?
        .iter()
        .map(|z| frame.g(&z.coeffs, &z.coeffs))
        .collect();
    Ok(PointWarp {
        cross,
        base_dependence,
        fiber_variation,
        gzz: g[(fiber[0], fiber[0])],
        fiber_block: block(g, fiber, fiber),
        field_norms,
        base_block,
    })
}

/// Detection half: block structure of the metric and the warping function.
pub fn recover_warping(spec: &ImmersionSpec, points: &[Vec<f64>]) -> GeomResult<WarpedReport> {
    if points.is_empty() {
        return Err(GeomError::EmptySample);
    }
    let roles = warp_roles(spec)?;
    let Some((base, fiber)) = aligned_coordinates(spec, roles) else {
        return Ok(WarpedReport::unaligned(spec, roles, points));
    };
    let per_point = points
        .par_iter()
        .map(|p| warp_at(spec, roles, &base, &fiber, p))
        .collect::<GeomResult<Vec<_>>>()?;

    let reference = &per_point[0];
    let mut cross = (0.0, None);
    let mut base_dependence = 0.0_f64;
    let mut fiber_variation = 0.0_f64;
    let mut conformal = 0.0_f64;
    let mut consistency = 0.0_f64;
    let mut f_samples = Vec::with_capacity(points.len());
    let mut base_metric = Vec::with_capacity(points.len());
    for (p, w) in points.iter().zip(&per_point) {
        if w.cross.0 > cross.0 {
            cross = (w.cross.0, Some(Witness { pair: w.cross.1.clone(), point: p.clone(), value: w.cross.2 }));
        }
        base_dependence = base_dependence.max(w.base_dependence);
        fiber_variation = fiber_variation.max(w.fiber_variation);
        let f2 = w.gzz / reference.gzz;
        let diff = &w.fiber_block - &reference.fiber_block * f2;
        conformal = conformal.max(diff.amax() / w.fiber_block.amax());
        for (n, n0) in w.field_norms.iter().zip(&reference.field_norms) {
            consistency = consistency.max((n / n0 / f2 - 1.0).abs());
        }
        f_samples.push(WarpSample { point: p.clone(), f: f2.sqrt() });
        base_metric.push(BaseMetricSample {
            point: p.clone(),
            block: w.base_block.row_iter().map(|r| r.iter().copied().collect()).collect(),
        });
    }
    let fmax = f_samples.iter().map(|s| s.f).fold(f64::NEG_INFINITY, f64::max);
    let fmin = f_samples.iter().map(|s| s.f).fold(f64::INFINITY, f64::min);
    let variation = (fmax - fmin) / fmax;

    let mut notes = Vec::new();
    let names = |ix: &[usize]| ix.iter().map(|&i| spec.chart[i].clone()).collect::<Vec<_>>();
    for i in 0..base.len() {
        for j in i + 1..base.len() {
            let m = base_metric.iter().map(|s| s.block[i][j].abs()).fold(0.0, f64::max);
            if m > tol::WARP_CROSS {
                notes.push(format!(
                    "measured base metric has a cross term g(∂{}, ∂{}) up to {m:.6} in magnitude; a diagonal base metric would be incomplete",
                    spec.chart[base[i]], spec.chart[base[j]]
                ));
            }
        }
    }

    let claim = match &spec.claims.warped {
        Some(c) => {
            let mut ratios = Vec::with_capacity(points.len());
            for s in &f_samples {
                let fc = c.warping.eval(&s.point).map_err(|source| GeomError::Eval {
                    what: "warping claim".into(),
                    point: s.point.clone(),
                    source,
                })?;
                ratios.push(fc * fc / (s.f * s.f));
            }
            let n = ratios.len() as f64;
            let mean = ratios.iter().sum::<f64>() / n;
            let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
            let ratio_variance = var / (mean * mean);
            Some(WarpClaimCheck {
                claim: c.text.clone(),
                scale: mean,
                ratio_variance,
                threshold: tol::WARP_CLAIM,
                matches: ratio_variance < tol::WARP_CLAIM,
            })
        }
        None => None,
    };

    let verdict = if cross.0 >= tol::WARP_CROSS {
        notes.push(format!(
            "base and fiber are not g-orthogonal: {}",
            cross.1.as_ref().map(|w| w.pair.as_str()).unwrap_or("")
        ));
        WarpVerdict::NotAnOrthogonalSplit
    } else if base_dependence >= tol::WARP_BASE_DEPENDENCE
        || conformal >= tol::WARP_CONSISTENCY
        || consistency >= tol::WARP_CONSISTENCY
        || fiber_variation >= tol::WARP_BASE_DEPENDENCE
    {
        if base_dependence >= tol::WARP_BASE_DEPENDENCE {
            notes.push("base block of the metric varies along the fiber".into());
        }
        if conformal >= tol::WARP_CONSISTENCY || consistency >= tol::WARP_CONSISTENCY {
            notes.push("fiber block is not conformal to a constant matrix".into());
        }
        if fiber_variation >= tol::WARP_BASE_DEPENDENCE {
            notes.push("the would-be warping function varies along the fiber".into());
        }
        WarpVerdict::NotWarped
    } else if variation < tol::WARP_TRIVIAL {
        WarpVerdict::TrivialWarpedProduct
    } else {
        WarpVerdict::Warped
    };

    Ok(WarpedReport {
        base: spec.distributions[roles.base].name.clone(),
        fiber: spec.distributions[roles.fiber].name.clone(),
        base_coordinates: names(&base),
        fiber_coordinates: names(&fiber),
        reference_point: points[0].clone(),
        cross_residual: Some(cross.0),
        cross_witness: cross.1.filter(|_| cross.0 >= tol::WARP_CROSS),
        base_dependence_residual: Some(base_dependence),
        fiber_conformal_residual: Some(conformal),
        field_consistency_residual: Some(consistency),
        fiber_variation_residual: Some(fiber_variation),
        f_samples,
        f_relative_variation: Some(variation),
        base_metric,
        claim,
        connection_residual: None,
        base_geodesic_residual: None,
        fiber_umbilic_residual: None,
        verdict,
        notes,
    })
}

/// Detection plus the warped connection relation and the leaf geometry, with their
/// worst residuals folded into the report.
pub fn analyze_warped(spec: &ImmersionSpec, points: &[Vec<f64>]) -> GeomResult<WarpedReport> {
    let mut report = recover_warping(spec, points)?;
    if !report.verdict.is_warped() {
        return Ok(report);
    }
    let connection = check_warp_connection(spec, points)?;
    report.connection_residual = connection.max_residual;
    let roles = warp_roles(spec)?;
    let fol = foliation_with(spec, points, roles, &Potential::Recovered(LogWarp::for_spec(spec, roles)))?;
    report.base_geodesic_residual = fol.max_residual_for(ANCHOR_TOTALLY_GEODESIC);
    report.fiber_umbilic_residual = fol.max_residual_for(ANCHOR_UMBILICAL);
    Ok(report)
}
