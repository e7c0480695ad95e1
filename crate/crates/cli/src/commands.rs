//! Subcommand implementations. Each returns a [`Report`] whose outcome is
//! the process exit code; only unreadable or invalid input is an `Err`.

use std::path::{Path, PathBuf};

use bislant_core::check::SuiteReport;
use bislant_core::conn::check_gauss_weingarten;
use bislant_core::dist::{check_bislant_axioms, check_corollary_3_3, check_integrability, check_lemma_3_2};
use bislant_core::immersion::{load_spec, sample_domain, ImmersionSpec, SpecError};
use bislant_core::structops::{check_structure_suite, compare_slant_claim, slant_function, SlantProfile, DEFAULT_PROBES};
use bislant_core::warp::{
    analyze_warped, check_characterization, check_foliation_geometry, check_lemma_4_1, check_lemma_4_2,
    check_lemma_4_3, check_warp_connection, check_special_cases, check_theorem_4_4,
};
use bislant_core::{GeomError, GeomResult};
use thiserror::Error;

use crate::fixtures::{fixture, Fixture, FIXTURES};
use crate::report::{ClaimRecord, ClaimVerdict, Classification, Outcome, Report, Sampling, SlantSummary, SpecInfo};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{source_name}: {error}")]
    Spec { source_name: String, error: SpecError },
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("unknown suite {name:?}; available: all, {}", SUITES.join(", "))]
    UnknownSuite { name: String },
    #[error("unknown example {name:?}; available: {}", FIXTURES.iter().map(|f| f.name).collect::<Vec<_>>().join(", "))]
    UnknownExample { name: String },
    #[error("{0}")]
    Usage(String),
}

/// Every suite `verify` knows, in the order `all` runs them.
pub const SUITES: &[&str] = &[
    "axioms",
    "eq2",
    "gauss-weingarten",
    "integrability",
    "lemma3.2",
    "cor3.3",
    "warp-connection",
    "lemma4.1",
    "lemma4.2",
    "lemma4.3",
    "thm4.4",
    "eq5.1",
    "cases",
    "foliation",
];

/// A spec file on disk or a bundled fixture.
pub enum SpecSource {
    File(PathBuf),
    Fixture(&'static Fixture),
}

impl SpecSource {
    pub fn path(p: impl AsRef<Path>) -> Self {
        SpecSource::File(p.as_ref().to_path_buf())
    }

    pub fn example(name: &str) -> Result<Self, CliError> {
        fixture(name)
            .map(SpecSource::Fixture)
            .ok_or_else(|| CliError::UnknownExample { name: name.to_string() })
    }

    fn read(&self) -> Result<(String, String), CliError> {
        match self {
            SpecSource::File(p) => std::fs::read_to_string(p)
                .map(|t| (p.display().to_string(), t))
                .map_err(|source| CliError::Read { path: p.clone(), source }),
            SpecSource::Fixture(f) => Ok((format!("fixture:{}", f.name), f.text.to_string())),
        }
    }

    pub fn load(&self) -> Result<(SpecInfo, ImmersionSpec), CliError> {
        let (name, text) = self.read()?;
        let spec = load_spec(&text).map_err(|error| CliError::Spec { source_name: name.clone(), error })?;
        Ok((SpecInfo::new(&name, &text), spec))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SampleArgs {
    pub samples: usize,
    pub seed: u64,
}

impl Default for SampleArgs {
    fn default() -> Self {
        Self { samples: 32, seed: 42 }
    }
}

struct Loaded {
    spec: ImmersionSpec,
    points: Vec<Vec<f64>>,
    report: Report,
}

fn prepare(command: &str, source: &SpecSource, args: SampleArgs) -> Result<Loaded, CliError> {
    let (info, spec) = source.load()?;
    let set = sample_domain(&spec, args.samples, args.seed)?;
    let report = Report::new(command, info, Sampling::new(args.seed, args.samples, &set), spec.ambient.report());
    Ok(Loaded { spec, points: set.points, report })
}

fn describe_profile(p: &SlantProfile) -> String {
    let cos = |a: f64| a.cos();
    format!(
        "{}, cos θ in [{:.12}, {:.12}]",
        p.class.as_str(),
        cos(p.max_angle),
        cos(p.min_angle)
    )
}

fn classify_into(l: &mut Loaded) -> Result<Outcome, CliError> {
    let profiles = l
        .spec
        .distributions
        .iter()
        .map(|d| slant_function(&l.spec, &d.name, &l.points, DEFAULT_PROBES))
        .collect::<GeomResult<Vec<_>>>()?;
    let axioms = if l.spec.distributions.len() == 2 {
        Some(check_bislant_axioms(&l.spec, &l.points)?)
    } else {
        None
    };
    for claim in &l.spec.claims.slant {
        let profile = profiles
            .iter()
            .find(|p| p.distribution == claim.distribution)
            .expect("claims name declared distributions");
        let c = compare_slant_claim(profile, claim)?;
        l.report.claims.push(ClaimRecord {
            kind: "slant",
            claim: claim.text.clone(),
            computed: describe_profile(profile),
            deviation: c.max_cos2_deviation,
            threshold: c.threshold,
            verdict: if c.matches { ClaimVerdict::Match } else { ClaimVerdict::Mismatch },
        });
    }
    let structural = match &axioms {
        Some(a) if !a.bislant => Outcome::IdentityFailure,
        _ if profiles.iter().any(|p| !p.class.is_slant()) => Outcome::IdentityFailure,
        _ => Outcome::Ok,
    };
    l.report.classification = Some(Classification {
        slant: profiles.iter().map(SlantSummary::from).collect(),
        axioms,
    });
    Ok(structural.combine(l.report.claims_outcome()))
}

/// Slant classification, bi-slant axioms and slant-claim comparison.
pub fn classify(source: &SpecSource, args: SampleArgs) -> Result<Report, CliError> {
    let mut l = prepare("classify", source, args)?;
    let outcome = classify_into(&mut l)?;
    l.report.set_outcome(outcome);
    Ok(l.report)
}

pub fn run_suite(name: &str, spec: &ImmersionSpec, points: &[Vec<f64>]) -> Result<SuiteReport, CliError> {
    let r = match name {
        "axioms" => check_bislant_axioms(spec, points).map(|a| a.to_suite()),
        "eq2" => check_structure_suite(spec, points),
        "gauss-weingarten" => check_gauss_weingarten(spec, points),
        "integrability" => check_integrability(spec, points),
        "lemma3.2" => check_lemma_3_2(spec, points),
        "cor3.3" => check_corollary_3_3(spec, points),
        "warp-connection" => check_warp_connection(spec, points),
        "lemma4.1" => check_lemma_4_1(spec, points),
        "lemma4.2" => check_lemma_4_2(spec, points),
        "lemma4.3" => check_lemma_4_3(spec, points),
        "thm4.4" => check_theorem_4_4(spec, points),
        "eq5.1" => check_characterization(spec, points),
        "cases" => check_special_cases(spec, points),
        "foliation" => check_foliation_geometry(spec, points),
        _ => return Err(CliError::UnknownSuite { name: name.to_string() }),
    };
    Ok(r?)
}

fn verify_into(l: &mut Loaded, suite: &str) -> Result<Outcome, CliError> {
    if suite == "all" {
        for name in SUITES {
            let r = match run_suite(name, &l.spec, &l.points) {
                // a suite that needs something this spec lacks is reported, not fatal
                Err(CliError::Geom(GeomError::Precondition(msg))) => SuiteReport::inapplicable(name, msg),
                other => other?,
            };
            l.report.suites.push(r);
        }
    } else {
        let r = run_suite(suite, &l.spec, &l.points)?;
        l.report.suites.push(r);
    }
    Ok(if l.report.suites.iter().any(|s| s.failed > 0) {
        Outcome::IdentityFailure
    } else {
        Outcome::Ok
    })
}

/// Runs one identity suite, or all of them.
pub fn verify(source: &SpecSource, suite: &str, args: SampleArgs) -> Result<Report, CliError> {
    if suite != "all" && !SUITES.contains(&suite) {
        return Err(CliError::UnknownSuite { name: suite.to_string() });
    }
    let mut l = prepare("verify", source, args)?;
    let outcome = verify_into(&mut l, suite)?;
    l.report.set_outcome(outcome);
    Ok(l.report)
}

fn warped_into(l: &mut Loaded) -> Result<Outcome, CliError> {
    let w = analyze_warped(&l.spec, &l.points)?;
    let outcome = if w.passed() { Outcome::Ok } else { Outcome::IdentityFailure };
    if let Some(c) = &w.claim {
        l.report.claims.push(ClaimRecord {
            kind: "warped",
            claim: c.claim.clone(),
            computed: format!("{}, f_claim² = {:.12} f²", w.verdict.as_str(), c.scale),
            deviation: c.ratio_variance,
            threshold: c.threshold,
            verdict: if c.matches && w.verdict.is_warped() { ClaimVerdict::Match } else { ClaimVerdict::Mismatch },
        });
    }
    l.report.warped = Some(w);
    Ok(outcome)
}

/// Warped-product detection, warping-function recovery and claim check.
pub fn warped(source: &SpecSource, args: SampleArgs) -> Result<Report, CliError> {
    let mut l = prepare("warped", source, args)?;
    let outcome = warped_into(&mut l)?;
    let claims = l.report.claims_outcome();
    l.report.set_outcome(outcome.combine(claims));
    Ok(l.report)
}

/// classify + verify all + warped, merged into one report.
pub fn run_example(name: &str, args: SampleArgs) -> Result<Report, CliError> {
    let source = SpecSource::example(name)?;
    let mut l = prepare("examples run", &source, args)?;
    let mut outcome = classify_into(&mut l)?;
    outcome = outcome.combine(verify_into(&mut l, "all")?);
    if l.spec.distributions.len() == 2 {
        outcome = outcome.combine(warped_into(&mut l)?);
    }
    outcome = outcome.combine(l.report.claims_outcome());
    l.report.set_outcome(outcome);
    Ok(l.report)
}

pub fn list_examples() -> String {
    FIXTURES.iter().map(|f| format!("{:<18} {}\n", f.name, f.description)).collect()
}

/// Grid settings for `export-slant`.
#[derive(Clone, Debug, Default)]
pub struct GridArgs {
    pub grid: usize,
    /// Coordinates held at one value.
    pub fix: Vec<(String, f64)>,
    /// Coordinate ranges replacing the domain box.
    pub range: Vec<(String, f64, f64)>,
}

/// Parses `name=value`.
pub fn parse_fix(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected name=value, got {s:?}"))?;
    let v = value.trim().parse::<f64>().map_err(|e| format!("{value:?}: {e}"))?;
    Ok((name.trim().to_string(), v))
}

/// Parses `name=lo,hi`.
pub fn parse_range(s: &str) -> Result<(String, f64, f64), String> {
    let (name, rest) = s.split_once('=').ok_or_else(|| format!("expected name=lo,hi, got {s:?}"))?;
    let (lo, hi) = rest.split_once(',').ok_or_else(|| format!("expected name=lo,hi, got {s:?}"))?;
    let lo = lo.trim().parse::<f64>().map_err(|e| format!("{lo:?}: {e}"))?;
    let hi = hi.trim().parse::<f64>().map_err(|e| format!("{hi:?}: {e}"))?;
    Ok((name.trim().to_string(), lo, hi))
}

/// Slant angle of `dist` on a grid, as CSV: chart coordinates then θ in
/// radians. Points where the angle is undefined get `NaN`.
pub fn export_slant(source: &SpecSource, dist: &str, g: &GridArgs) -> Result<String, CliError> {
    let (_, spec) = source.load()?;
    spec.distribution_index(dist)?;
    if g.grid == 0 {
        return Err(CliError::Usage("--grid must be at least 1".into()));
    }
    let coord = |name: &str| {
        spec.chart
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CliError::Usage(format!("unknown coordinate {name:?}")))
    };
    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(spec.dim());
    let mut bounds: Vec<(f64, f64)> = spec.domain.iter().map(|iv| (iv.lo, iv.hi)).collect();
    for (name, lo, hi) in &g.range {
        bounds[coord(name)?] = (*lo, *hi);
    }
    for (lo, hi) in &bounds {
        let n = g.grid;
        axes.push(if n == 1 {
            vec![0.5 * (lo + hi)]
        } else {
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        });
    }
    for (name, v) in &g.fix {
        axes[coord(name)?] = vec![*v];
    }
    let mut points = vec![Vec::new()];
    for axis in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |x| {
                    let mut q = p.clone();
                    q.push(*x);
                    q
                })
            })
            .collect();
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = spec.chart.clone();
    header.push("theta".into());
    w.write_record(&header).map_err(csv_err)?;
    for p in &points {
        let theta = slant_function(&spec, dist, std::slice::from_ref(p), DEFAULT_PROBES)
            .map(|s| s.samples[0].mean)
            .unwrap_or(f64::NAN);
        let row: Vec<String> = p.iter().chain(std::iter::once(&theta)).map(|x| x.to_string()).collect();
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Usage(format!("csv: {e}"))
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Write { path: path.to_path_buf(), source })
}
