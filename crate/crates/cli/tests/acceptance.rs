//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the lines are always printed; exits non-zero on any unexpected result.

use std::process::Command;

use bislant_cli::commands::{self, SampleArgs, SpecSource};
use bislant_cli::fixtures::fixture;
use bislant_cli::report::{ClaimVerdict, Report};
use bislant_core::check::SuiteStatus;
use bislant_core::conn::{ANCHOR_CHRISTOFFEL, ANCHOR_GAUSS, ANCHOR_SHAPE, ANCHOR_WEINGARTEN};
use bislant_core::immersion::{load_spec, sample_domain, ImmersionSpec};
use bislant_core::structops::{slant_function, SlantClass, DEFAULT_PROBES};
use bislant_core::warp::{WarpVerdict, ANCHOR_CASE_1, ANCHOR_UMBILICAL};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const ARGS: SampleArgs = SampleArgs { samples: 32, seed: 42 };

enum Verdict {
    Pass,
    Fail,
    /// Fails exactly in the way recorded as a defect of the source identity.
    KnownFail,
}

struct Criterion {
    verdict: Verdict,
    detail: String,
}

fn check(ok: bool, detail: String) -> Criterion {
    Criterion { verdict: if ok { Verdict::Pass } else { Verdict::Fail }, detail }
}

fn spec(name: &str) -> ImmersionSpec {
    load_spec(fixture(name).unwrap().text).unwrap()
}

fn points(spec: &ImmersionSpec) -> Vec<Vec<f64>> {
    sample_domain(spec, ARGS.samples, ARGS.seed).unwrap().points
}

fn example(name: &str) -> SpecSource {
    SpecSource::example(name).unwrap()
}

fn verify(name: &str, suite: &str) -> Report {
    commands::verify(&example(name), suite, ARGS).unwrap()
}

fn claim_verdict(report: &Report, prefix: &str) -> Option<(ClaimVerdict, f64)> {
    report
        .claims
        .iter()
        .find(|c| c.claim.starts_with(prefix))
        .map(|c| (c.verdict, c.deviation))
}

// --- brute-force oracle ---------------------------------------------------
//
// Shares nothing with the library beyond expression evaluation: Jacobian by
// a fourth-order difference stencil, tangent projection by SVD least
// squares, and many random probe directions per point.

fn oracle_jacobian(spec: &ImmersionSpec, p: &[f64]) -> DMatrix<f64> {
    let h = 1e-3;
    let n = spec.components.len();
    let k = p.len();
    let eval = |q: &[f64]| DVector::from_iterator(n, spec.components.iter().map(|c| c.eval(q).unwrap()));
    let mut j = DMatrix::zeros(n, k);
    for i in 0..k {
        let at = |s: f64| {
            let mut q = p.to_vec();
            q[i] += s * h;
            eval(&q)
        };
        let col = (at(-2.0) - at(2.0) + (at(1.0) - at(-1.0)) * 8.0) / (12.0 * h);
        j.set_column(i, &col);
    }
    j
}

/// (cos θ, ‖normal part of FX‖/‖X‖) for random X in the distribution.
fn oracle_probes(spec: &ImmersionSpec, dist: &str, p: &[f64], count: usize, rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    let j = oracle_jacobian(spec, p);
    let d = spec.distribution(dist).unwrap();
    let k = p.len();
    let basis = DMatrix::from_fn(k, d.rank(), |i, c| d.fields[c].coeffs[i].eval(p).unwrap());
    let f = spec.ambient.matrix();
    let svd = j.clone().svd(true, true);
    (0..count)
        .map(|_| {
            let c = DVector::from_fn(d.rank(), |_, _| StandardNormal.sample(rng));
            let x = &j * (&basis * c);
            let fx = f * &x;
            let a = svd.solve(&fx, 1e-14).unwrap();
            let tangent = &j * a;
            (tangent.norm() / x.norm(), (fx - tangent).norm() / x.norm())
        })
        .collect()
}

// --- criteria -------------------------------------------------------------

fn criterion_1() -> Criterion {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["ex6.1", "ex6.2"] {
        let r = spec(name).ambient.report();
        ok &= r.valid && r.involution_residual == 0.0 && r.isometry_residual == 0.0;
        parts.push(format!("{name}: F²−I {:e}, FᵀF−I {:e}", r.involution_residual, r.isometry_residual));
    }
    check(ok, parts.join("; "))
}

fn criterion_2() -> Criterion {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["ex6.1", "ex6.2"] {
        let r = verify(name, "eq2");
        let s = r.suite("eq2").unwrap();
        let max = s.max_residual.unwrap_or(f64::NAN);
        ok &= s.status == SuiteStatus::Pass && max < 1e-8 && r.sampling.used == 32;
        parts.push(format!("{name}: {} checks, max residual {max:.2e}", s.evaluated));
    }
    check(ok, parts.join("; "))
}

fn criterion_3() -> Criterion {
    let r61 = commands::classify(&example("ex6.1"), ARGS).unwrap();
    let r62 = commands::classify(&example("ex6.2"), ARGS).unwrap();
    let c61 = claim_verdict(&r61, "slant D2");
    let c62 = claim_verdict(&r62, "slant D1");
    let ok = matches!(c61, Some((ClaimVerdict::Match, d)) if d < 1e-9) && matches!(c62, Some((ClaimVerdict::Match, d)) if d < 1e-9);
    check(
        ok,
        format!(
            "ex6.1 D2 cos² deviation {:.2e}, ex6.2 D1 cos² deviation {:.2e}",
            c61.map(|c| c.1).unwrap_or(f64::NAN),
            c62.map(|c| c.1).unwrap_or(f64::NAN)
        ),
    )
}

fn criterion_4() -> Criterion {
    let s61 = spec("ex6.1");
    let s62 = spec("ex6.2");
    let (p61, p62) = (points(&s61), points(&s62));
    let expected = 5f64.sqrt() / 3.0;

    let prof61 = slant_function(&s61, "D1", &p61, DEFAULT_PROBES).unwrap();
    let tool_normal = prof61.samples.iter().map(|s| s.max_normal_ratio).fold(0.0, f64::max);
    let prof62 = slant_function(&s62, "D2", &p62, DEFAULT_PROBES).unwrap();
    let tool_cos = prof62
        .samples
        .iter()
        .map(|s| (s.cos2.sqrt() - expected).abs())
        .fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut oracle_normal = 0.0_f64;
    for p in p61.iter().take(8) {
        for (_, n) in oracle_probes(&s61, "D1", p, 2000, &mut rng) {
            oracle_normal = oracle_normal.max(n);
        }
    }
    let mut oracle_cos = 0.0_f64;
    for p in p62.iter().take(8) {
        for (c, _) in oracle_probes(&s62, "D2", p, 2000, &mut rng) {
            oracle_cos = oracle_cos.max((c - expected).abs());
        }
    }

    let r61 = commands::classify(&example("ex6.1"), ARGS).unwrap();
    let r62 = commands::classify(&example("ex6.2"), ARGS).unwrap();
    let mismatch61 = matches!(claim_verdict(&r61, "slant D1"), Some((ClaimVerdict::Mismatch, _)));
    let mismatch62 = matches!(claim_verdict(&r62, "slant D2"), Some((ClaimVerdict::Mismatch, _)));

    let ok = prof61.class == SlantClass::Invariant
        && tool_normal < 1e-9
        && prof62.class == SlantClass::SlantConstant
        && tool_cos < 1e-9
        && oracle_normal < 1e-9
        && oracle_cos < 1e-9
        && mismatch61
        && mismatch62;
    check(
        ok,
        format!(
            "ex6.1 D1 {} (‖ωX‖/‖X‖ tool {tool_normal:.1e}, oracle {oracle_normal:.1e}), claim mismatch {mismatch61}; \
             ex6.2 D2 {} (|cos θ − √5/3| tool {tool_cos:.1e}, oracle {oracle_cos:.1e}), claim mismatch {mismatch62}",
            prof61.class.as_str(),
            prof62.class.as_str()
        ),
    )
}

fn criterion_5() -> Criterion {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["ex6.1", "ex6.2"] {
        let r = verify(name, "gauss-weingarten");
        let s = r.suite("gauss-weingarten").unwrap();
        let get = |a| s.max_residual_for(a).unwrap_or(f64::NAN);
        let (g, sh, w, c) = (get(ANCHOR_GAUSS), get(ANCHOR_SHAPE), get(ANCHOR_WEINGARTEN), get(ANCHOR_CHRISTOFFEL));
        ok &= s.status == SuiteStatus::Pass && g < 1e-9 && sh < 1e-10 && w < 1e-5 && c < 1e-5;
        parts.push(format!("{name}: Gauss {g:.1e}, shape {sh:.1e}, Weingarten {w:.1e}, Christoffel {c:.1e}"));
    }
    check(ok, parts.join("; "))
}

fn criterion_6() -> Criterion {
    let r62 = commands::warped(&example("ex6.2"), ARGS).unwrap();
    let w62 = r62.warped.as_ref().unwrap();
    let c62 = w62.claim.as_ref().unwrap();
    let connection = w62.connection_residual.unwrap_or(f64::NAN);
    let ok62 = w62.verdict == WarpVerdict::Warped && c62.ratio_variance < 1e-10 && c62.matches && connection < 1e-5;

    let r61 = commands::warped(&example("ex6.1"), ARGS).unwrap();
    let w61 = r61.warped.as_ref().unwrap();
    let c61 = w61.claim.as_ref().unwrap();
    // base coordinates are (u, w): block[0][1] = g(∂u, ∂w)
    let cross = w61
        .base_metric
        .iter()
        .map(|s| (s.block[0][1] - s.point[0] * s.point[2]).abs())
        .fold(0.0, f64::max);
    let noted = w61.notes.iter().any(|n| n.contains("g(∂u, ∂w)"));
    let ok61 = w61.verdict == WarpVerdict::Warped
        && w61.base_coordinates == ["u", "w"]
        && c61.matches
        && cross < 1e-10
        && noted;
    check(
        ok62 && ok61,
        format!(
            "ex6.2 f² ratio variance {:.1e}, connection {connection:.1e}; ex6.1 f² ratio variance {:.1e}, |g(∂u,∂w) − uw| {cross:.1e}, note emitted {noted}",
            c62.ratio_variance, c61.ratio_variance
        ),
    )
}

/// Suites whose printed identity is off by a factor of two: they must fail
/// with lhs/rhs = 0.5 and nothing else.
const FACTOR_TWO: [&str; 2] = ["lemma4.1", "lemma4.2"];

fn criterion_7() -> Criterion {
    let suites = ["lemma3.2", "cor3.3", "lemma4.1", "lemma4.2", "lemma4.3", "thm4.4", "eq5.1", "cases", "foliation"];
    let mut all_pass = true;
    let mut only_known = true;
    let mut parts = Vec::new();
    for name in ["ex6.1", "ex6.2"] {
        let r = verify(name, "all");
        let mut line = Vec::new();
        for s in suites {
            let rep = r.suite(s).unwrap();
            let applicable_skip = rep.status == SuiteStatus::Skipped
                && ((s == "cor3.3" || s == "cases") && name == "ex6.2");
            let pass = rep.status == SuiteStatus::Pass && rep.max_residual.unwrap_or(0.0) < 1e-5 || applicable_skip;
            if s == "cases" && name == "ex6.1" {
                only_known &= rep.checks.iter().any(|c| c.anchor == ANCHOR_CASE_1);
            }
            if !pass {
                all_pass = false;
                let ratio = rep
                    .notes
                    .iter()
                    .find_map(|n| n.strip_prefix("median lhs/rhs over checks with |rhs| > 1e-8: "))
                    .and_then(|v| v.parse::<f64>().ok());
                let known = FACTOR_TWO.contains(&s) && ratio.is_some_and(|q| (q - 0.5).abs() < 1e-6);
                only_known &= known;
                line.push(format!("{s} FAIL {}/{} (lhs/rhs {})", rep.failed, rep.evaluated, ratio.map(|q| format!("{q:.6}")).unwrap_or("-".into())));
            } else if rep.skipped > 0 || rep.status == SuiteStatus::Skipped {
                line.push(format!("{s} {} ({} skipped)", if rep.status == SuiteStatus::Skipped { "n/a" } else { "pass" }, rep.skipped));
            }
        }
        parts.push(format!("{name}: {}", if line.is_empty() { "all pass".to_string() } else { line.join(", ") }));
    }
    let verdict = if all_pass {
        Verdict::Pass
    } else if only_known {
        Verdict::KnownFail
    } else {
        Verdict::Fail
    };
    Criterion { verdict, detail: parts.join("; ") }
}

fn criterion_8() -> Criterion {
    let nonint = verify("toy_nonintegrable", "integrability");
    let integ = nonint.suite("integrability").unwrap();
    let r_int = integ.max_residual.unwrap_or(0.0);
    let ok_int = integ.status == SuiteStatus::Fail
        && integ
            .checks
            .iter()
            .filter(|c| c.probe.starts_with("D1"))
            .all(|c| c.residual.unwrap_or(0.0) > 0.1);

    let pert = verify("toy_perturbed", "foliation");
    let fol = pert.suite("foliation").unwrap();
    let umb = fol.max_residual_for(ANCHOR_UMBILICAL).unwrap_or(0.0);
    let ok_umb = fol.checks.iter().any(|c| c.anchor == ANCHOR_UMBILICAL && c.failed());
    let pert_w = commands::warped(&example("toy_perturbed"), ARGS).unwrap();
    let not_warped = pert_w.warped.as_ref().unwrap().verdict == WarpVerdict::NotWarped;

    let cls = commands::classify(&example("toy_nonorthogonal"), ARGS).unwrap();
    let ax = cls.classification.as_ref().unwrap().axioms.as_ref().unwrap();
    let witness = ax.mixing_witness.as_ref().map(|w| format!("{} = {}", w.pair, w.value)).unwrap_or_default();
    let ok_b = !ax.axiom_b && witness.starts_with("g(F·du, dv)") && cls.exit_code == 1;

    check(
        ok_int && ok_umb && not_warped && ok_b,
        format!("integrability residual {r_int:.3}; umbilicity residual {umb:.3} (not warped {not_warped}); axiom (b) witness {witness}"),
    )
}

fn criterion_9() -> Criterion {
    let dir = tempfile::tempdir().unwrap();
    let spec = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/ex62.lps");
    let run = |threads: &str, out: &str| {
        let path = dir.path().join(out);
        let status = Command::new(env!("CARGO_BIN_EXE_bislant"))
            .args(["verify", spec, "--suite", "all", "--samples", "32", "--seed", "7", "-o"])
            .arg(&path)
            .env("BISLANT_THREADS", threads)
            .output()
            .unwrap()
            .status;
        (status.code(), std::fs::read(path).unwrap())
    };
    let (c1, a) = run("1", "a.json");
    let (c2, b) = run("4", "b.json");
    check(
        a == b && c1 == c2 && !a.is_empty(),
        format!("{} bytes, identical {} (1 vs 4 threads, exit {:?})", a.len(), a == b, c1),
    )
}

type CriterionFn = fn() -> Criterion;

fn main() {
    let criteria: [(&str, CriterionFn); 9] = [
        ("structure validation", criterion_1),
        ("structure identities", criterion_2),
        ("slant function claims", criterion_3),
        ("slant claim adjudication", criterion_4),
        ("Gauss and Weingarten", criterion_5),
        ("warped detection", criterion_6),
        ("identity suites", criterion_7),
        ("negative controls", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut unexpected = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let c = f();
        let tag = match c.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => {
                unexpected += 1;
                "FAIL"
            }
            Verdict::KnownFail => "FAIL (known: printed identity off by a factor of 2)",
        };
        println!("criterion {}: {name}: {tag} -- {}", i + 1, c.detail);
    }
    if unexpected > 0 {
        eprintln!("{unexpected} acceptance criteria failed");
        std::process::exit(1);
    }
}
