//! The JSON report and the exit-code contract.

use std::fmt::Write as _;

use bislant_core::ambient::StructureReport;
use bislant_core::check::{SuiteReport, SuiteStatus};
use bislant_core::dist::AxiomReport;
use bislant_core::immersion::SampleSet;
use bislant_core::structops::{SlantClass, SlantProfile};
use bislant_core::warp::WarpedReport;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const SCHEMA: u32 = 1;

/// Process outcome. Numeric values are the exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Ok,
    IdentityFailure,
    InputError,
    ClaimMismatch,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Ok => 0,
            Outcome::IdentityFailure => 1,
            Outcome::InputError => 2,
            Outcome::ClaimMismatch => 3,
        }
    }

    fn rank(self) -> u8 {
        match self {
            Outcome::Ok => 0,
            Outcome::ClaimMismatch => 1,
            Outcome::IdentityFailure => 2,
            Outcome::InputError => 3,
        }
    }

    /// Input errors outrank identity failures, which outrank claim
    /// mismatches.
    pub fn combine(self, other: Outcome) -> Outcome {
        if other.rank() > self.rank() {
            other
        } else {
            self
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpecInfo {
    pub source: String,
    pub sha256: String,
}

impl SpecInfo {
    pub fn new(source: &str, text: &str) -> Self {
        Self {
            source: source.to_string(),
            sha256: hex::encode(Sha256::digest(text.as_bytes())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sampling {
    pub seed: u64,
    pub requested: usize,
    pub used: usize,
    pub candidates: usize,
    pub dropped_singular: usize,
    pub dropped_expression: usize,
    pub dropped_dependent: usize,
}

impl Sampling {
    pub fn new(seed: u64, requested: usize, set: &SampleSet) -> Self {
        Self {
            seed,
            requested,
            used: set.points.len(),
            candidates: set.candidates,
            dropped_singular: set.dropped_singular,
            dropped_expression: set.dropped_expression,
            dropped_dependent: set.dropped_dependent,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlantSummary {
    pub distribution: String,
    pub class: SlantClass,
    pub min_angle: f64,
    pub max_angle: f64,
    pub max_spread: f64,
}

impl From<&SlantProfile> for SlantSummary {
    fn from(p: &SlantProfile) -> Self {
        Self {
            distribution: p.distribution.clone(),
            class: p.class,
            min_angle: p.min_angle,
            max_angle: p.max_angle,
            max_spread: p.max_spread,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClaimVerdict {
    Match,
    Mismatch,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClaimRecord {
    pub kind: &'static str,
    pub claim: String,
    pub computed: String,
    pub deviation: f64,
    pub threshold: f64,
    pub verdict: ClaimVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub slant: Vec<SlantSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axioms: Option<AxiomReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub spec: SpecInfo,
    pub sampling: Sampling,
    pub structure: StructureReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<Classification>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub suites: Vec<SuiteReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warped: Option<WarpedReport>,
    pub claims: Vec<ClaimRecord>,
    pub outcome: Outcome,
    pub exit_code: i32,
}

impl Report {
    pub fn new(command: &str, spec: SpecInfo, sampling: Sampling, structure: StructureReport) -> Self {
        Self {
            schema: SCHEMA,
            tool: "bislant",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            spec,
            sampling,
            structure,
            classification: None,
            suites: Vec::new(),
            warped: None,
            claims: Vec::new(),
            outcome: Outcome::Ok,
            exit_code: 0,
        }
    }

    pub fn set_outcome(&mut self, outcome: Outcome) {
        self.outcome = outcome;
        self.exit_code = outcome.code();
    }

    pub fn claims_outcome(&self) -> Outcome {
        if self.claims.iter().any(|c| c.verdict == ClaimVerdict::Mismatch) {
            Outcome::ClaimMismatch
        } else {
            Outcome::Ok
        }
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteReport> {
        self.suites.iter().find(|s| s.suite == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Short human-readable digest of the report.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {} (sha256 {})", self.command, self.spec.source, &self.spec.sha256[..12]);
        let s = &self.sampling;
        let _ = writeln!(
            out,
            "  samples: {} of {} requested (seed {}, {} candidates, {} dropped)",
            s.used,
            s.requested,
            s.seed,
            s.candidates,
            s.dropped_singular + s.dropped_expression + s.dropped_dependent
        );
        if let Some(c) = &self.classification {
            for d in &c.slant {
                let _ = writeln!(
                    out,
                    "  {}: {} (θ in [{:.6}, {:.6}])",
                    d.distribution,
                    d.class.as_str(),
                    d.min_angle,
                    d.max_angle
                );
            }
            if let Some(a) = &c.axioms {
                let _ = writeln!(out, "  axioms: (a) {} (b) {} (c) {}", ok(a.axiom_a), ok(a.axiom_b), ok(a.axiom_c));
                if let Some(w) = &a.mixing_witness {
                    let _ = writeln!(out, "    witness: {} = {} at {:?}", w.pair, w.value, w.point);
                }
                if let Some(w) = &a.orthogonality_witness {
                    let _ = writeln!(out, "    witness: {} = {} at {:?}", w.pair, w.value, w.point);
                }
                let _ = writeln!(out, "  {}", a.summary);
            }
        }
        for r in &self.suites {
            let status = match r.status {
                SuiteStatus::Pass => "pass",
                SuiteStatus::Fail => "FAIL",
                SuiteStatus::Skipped => "skipped",
            };
            let max = r.max_residual.map(|m| format!("{m:.3e}")).unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "  {:<17} {:<7} evaluated {:>5}  failed {:>5}  skipped {:>4}  max residual {}",
                r.suite, status, r.evaluated, r.failed, r.skipped, max
            );
            for n in &r.notes {
                let _ = writeln!(out, "      {n}");
            }
        }
        if let Some(w) = &self.warped {
            let _ = writeln!(out, "  warped: {} (base {}, fiber {})", w.verdict.as_str(), w.base, w.fiber);
            for n in &w.notes {
                let _ = writeln!(out, "      {n}");
            }
        }
        for c in &self.claims {
            let v = match c.verdict {
                ClaimVerdict::Match => "match",
                ClaimVerdict::Mismatch => "MISMATCH",
            };
            let _ = writeln!(out, "  claim {}: {} -> {} (computed {}, deviation {:.3e})", c.kind, c.claim, v, c.computed, c.deviation);
        }
        let _ = writeln!(out, "  exit {}", self.exit_code);
        out
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "FAIL"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcome_priority() {
        use Outcome::*;
        assert_eq!(Ok.combine(ClaimMismatch), ClaimMismatch);
        assert_eq!(ClaimMismatch.combine(IdentityFailure), IdentityFailure);
        assert_eq!(IdentityFailure.combine(ClaimMismatch), IdentityFailure);
        assert_eq!(IdentityFailure.combine(InputError), InputError);
        assert_eq!(InputError.combine(Ok), InputError);
    }
}
