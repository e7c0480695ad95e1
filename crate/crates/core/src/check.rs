//! Residual records shared by every verification suite.

use serde::Serialize;

/// One evaluated identity at one point for one choice of probe fields.
///
/// Skipped records keep the location and the reason but carry no numbers;
/// `pass` is `None` for them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub suite: String,
    /// The identity as a formula, e.g. `g(TX,Y) = g(X,TY)`.
    pub anchor: &'static str,
    /// Which probe fields were used, e.g. `X=du, Z=dv`.
    pub probe: String,
    pub point: Vec<f64>,
    /// Left and right side. Vector identities store g-norms here.
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub residual: Option<f64>,
    pub threshold: f64,
    pub pass: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped_reason: Option<String>,
}

/// `max(1, |a|, |b|)`: relative comparison with a unit floor.
pub fn unit_floor(a: f64, b: f64) -> f64 {
    1f64.max(a.abs()).max(b.abs())
}

impl IdentityCheck {
    /// Scalar identity with `residual = |lhs - rhs| / scale`.
    #[allow(clippy::too_many_arguments)]
    pub fn scalar(
        suite: &str,
        anchor: &'static str,
        probe: impl Into<String>,
        point: &[f64],
        lhs: f64,
        rhs: f64,
        scale: f64,
        threshold: f64,
    ) -> Self {
        let residual = (lhs - rhs).abs() / scale;
        Self::measured(suite, anchor, probe, point, lhs, rhs, residual, threshold)
    }

    /// Record with a precomputed residual (vector identities, matrix norms).
    #[allow(clippy::too_many_arguments)]
    pub fn measured(
        suite: &str,
        anchor: &'static str,
        probe: impl Into<String>,
        point: &[f64],
        lhs: f64,
        rhs: f64,
        residual: f64,
        threshold: f64,
    ) -> Self {
        // NaN never passes
        let pass = residual < threshold;
        Self {
            suite: suite.to_string(),
            anchor,
            probe: probe.into(),
            point: point.to_vec(),
            lhs: Some(lhs),
            rhs: Some(rhs),
            residual: Some(residual),
            threshold,
            pass: Some(pass),
            skipped_reason: None,
        }
    }

    pub fn skipped(
        suite: &str,
        anchor: &'static str,
        probe: impl Into<String>,
        point: &[f64],
        threshold: f64,
        reason: impl Into<String>,
    ) -> Self {
        Self {
            suite: suite.to_string(),
            anchor,
            probe: probe.into(),
            point: point.to_vec(),
            lhs: None,
            rhs: None,
            residual: None,
            threshold,
            pass: None,
            skipped_reason: Some(reason.into()),
        }
    }

    pub fn failed(&self) -> bool {
        self.pass == Some(false)
    }

    pub fn is_skipped(&self) -> bool {
        self.pass.is_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteStatus {
    Pass,
    Fail,
    /// Nothing was evaluated: every check was skipped or the suite does not
    /// apply to the spec.
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub status: SuiteStatus,
    pub evaluated: usize,
    pub failed: usize,
    pub skipped: usize,
    pub max_residual: Option<f64>,
    pub notes: Vec<String>,
    pub checks: Vec<IdentityCheck>,
}

impl SuiteReport {
    pub fn new(suite: &str, checks: Vec<IdentityCheck>, notes: Vec<String>) -> Self {
        let evaluated = checks.iter().filter(|c| !c.is_skipped()).count();
        let failed = checks.iter().filter(|c| c.failed()).count();
        let skipped = checks.len() - evaluated;
        let max_residual = checks
            .iter()
            .filter_map(|c| c.residual)
            .fold(None, |acc: Option<f64>, r| {
                Some(match acc {
                    Some(a) if a >= r || r.is_nan() => a,
                    _ => r,
                })
            });
        let status = if failed > 0 {
            SuiteStatus::Fail
        } else if evaluated == 0 {
            SuiteStatus::Skipped
        } else {
            SuiteStatus::Pass
        };
        Self {
            suite: suite.to_string(),
            status,
            evaluated,
            failed,
            skipped,
            max_residual,
            notes,
            checks,
        }
    }

    /// A suite that does not apply at all, with the reason as its only note.
    pub fn inapplicable(suite: &str, reason: impl Into<String>) -> Self {
        Self::new(suite, Vec::new(), vec![reason.into()])
    }

    pub fn passed(&self) -> bool {
        self.status == SuiteStatus::Pass
    }

    /// Max residual among checks whose anchor is `anchor`.
    pub fn max_residual_for(&self, anchor: &str) -> Option<f64> {
        self.checks
            .iter()
            .filter(|c| c.anchor == anchor)
            .filter_map(|c| c.residual)
            .reduce(f64::max)
    }

    pub fn skipped_reasons(&self) -> Vec<&str> {
        self.checks.iter().filter_map(|c| c.skipped_reason.as_deref()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_residual_fails() {
        let c = IdentityCheck::scalar("s", "a = b", "", &[0.0], f64::NAN, 1.0, 1.0, 1e-8);
        assert!(c.failed());
    }

    #[test]
    fn suite_status() {
        let ok = IdentityCheck::scalar("s", "a = b", "", &[0.0], 1.0, 1.0, 1.0, 1e-8);
        let bad = IdentityCheck::scalar("s", "a = b", "", &[0.0], 1.0, 2.0, 1.0, 1e-8);
        let skip = IdentityCheck::skipped("s", "a = b", "", &[0.0], 1e-8, "degenerate");
        assert_eq!(SuiteReport::new("s", vec![ok.clone(), skip.clone()], vec![]).status, SuiteStatus::Pass);
        let r = SuiteReport::new("s", vec![ok, bad, skip.clone()], vec![]);
        assert_eq!(r.status, SuiteStatus::Fail);
        assert_eq!((r.evaluated, r.failed, r.skipped), (2, 1, 1));
        assert_eq!(r.max_residual, Some(1.0));
        assert_eq!(SuiteReport::new("s", vec![skip], vec![]).status, SuiteStatus::Skipped);
    }
}
