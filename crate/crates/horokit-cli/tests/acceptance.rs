//! Acceptance criteria 1–10, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines always reach stdout. The
//! process fails if any criterion fails, except those listed in
//! `UNATTAINABLE`, whose failure is pinned to its analysed cause instead.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use horokit::constants::normalization_ratio;
use horokit_cli::output::Row;
use horokit_cli::suites::{self, SuiteReport};

const SEED: u64 = 7;
const DETERMINISM_SEED: u64 = 11;

/// Criteria that cannot pass as stated; see the decisions ledger.
const UNATTAINABLE: &[u8] = &[4];

struct Verdict {
    pass: bool,
    detail: String,
    /// For unattainable criteria: whether the failure has the expected cause.
    expected_failure: bool,
}

impl Verdict {
    fn of(pass: bool, detail: String) -> Self {
        Self { pass, detail, expected_failure: false }
    }
}

fn suite(name: &str) -> SuiteReport {
    suites::run(name, SEED).unwrap_or_else(|e| panic!("suite {name}: {e}"))
}

fn worst<'a>(rows: impl Iterator<Item = &'a Row>) -> (f64, usize, bool) {
    rows.fold((0.0f64, 0, true), |(m, n, ok), r| (m.max(r.rel_err.unwrap_or(f64::NAN)), n + 1, ok && r.pass))
}

fn least<'a>(rows: impl Iterator<Item = &'a Row>) -> (f64, usize, bool) {
    rows.fold((f64::INFINITY, 0, true), |(m, n, ok), r| (m.min(r.rel_err.unwrap_or(f64::NAN)), n + 1, ok && r.pass))
}

fn homogeneity() -> Verdict {
    let r = suite("homogeneity");
    let (dev, n, ok) = worst(r.check("scaling"));
    Verdict::of(ok && n == 20, format!("{n} cases on X(1,2) and S^2, max relative deviation {dev:.1e} (tol {:.0e})", suites::HOMOGENEITY_TOL))
}

fn ultrahyperbolic() -> Verdict {
    let r = suite("pde");
    let (order, n, ok) = least(r.check("order"));
    Verdict::of(ok && n == 6, format!("{n} sections, min order {order:.2} over h = 0.2, 0.1, 0.05 (need {}), above noise", suites::PDE_MIN_ORDER))
}

fn lemma1() -> Verdict {
    let r = suite("lemma1");
    let (order, n, ok) = least(r.check("order"));
    Verdict::of(ok && n == 10, format!("{n} random fields, min order {order:.2} (need {})", suites::LEMMA1_MIN_ORDER))
}

fn reconstruction() -> Verdict {
    let r = suite("reconstruction");
    let (even, ne, ok_e) = worst(r.check("even"));
    let (odd, no, ok_o) = worst(r.check("odd"));
    let (cal, _, ok_c) = worst(r.check("calibration"));
    let printed: Vec<&Row> = r.check("printed_constant").collect();
    let ratio = printed.iter().map(|p| p.value.re).fold(0.0, f64::max);
    let printed_ok = printed.iter().all(|p| p.pass);
    let attainable = ok_e && ok_o && ok_c && ne == 10 && no == 10;
    // the mismatch must be exactly the real factor ((n-1)!)^2 and nothing else
    let cause = printed
        .iter()
        .all(|p| (p.value.re - normalization_ratio(3)).abs() <= 1e-6 * normalization_ratio(3) && p.value.im.abs() <= 1e-6);
    Verdict {
        pass: attainable && printed_ok,
        detail: format!(
            "even {even:.1e}, odd {odd:.1e} (tol {:.0e}); calibration spread {cal:.1e}; observed/printed constant = {ratio:.6} (not unimodular)",
            suites::RECONSTRUCTION_TOL
        ),
        expected_failure: attainable && !printed_ok && cause,
    }
}

fn homology() -> Verdict {
    let r = suite("cycles");
    let (dev, n, ok) = worst(r.check("deformation"));
    Verdict::of(ok && n == 10, format!("rho and delta in {{0, .25, .5, .75, 1}}, max deviation {dev:.1e} of reference (tol {:.0e})", suites::HOMOLOGY_TOL))
}

fn hyperbolic_inversion() -> Verdict {
    let r = suite("inversion-hyperbolic");
    let (inside, ni, ok_i) = worst(r.check("inside"));
    let (outside, no, ok_o) = worst(r.check("outside"));
    Verdict::of(
        ok_i && ok_o && ni == 15 && no == 5,
        format!(
            "5 bumps x 3 points max rel error {inside:.1e} (tol {:.0e}); off support {outside:.1e} of max f (tol {:.0e})",
            suites::HYPERBOLIC_INVERSION_TOL,
            suites::OFF_SUPPORT_TOL
        ),
    )
}

fn sphere_inversion() -> Verdict {
    let r = suite("inversion-sphere");
    let (value, nv, ok_v) = worst(r.check("value"));
    let (halving, nh, ok_h) = worst(r.check("shift_halving"));
    Verdict::of(
        ok_v && ok_h && nv == 15 && nh == 15,
        format!(
            "5 functions x 3 points max rel error {value:.1e} (tol {:.0e}); shift halving changes {halving:.1e} (tol {:.0e})",
            suites::SPHERE_INVERSION_TOL,
            suites::SHIFT_HALVING_TOL
        ),
    )
}

fn circle_action() -> Verdict {
    let r = suite("circle");
    let (own, ns, ok_s) = worst(r.check("self"));
    let (leak, nl, ok_l) = worst(r.check("leakage"));
    Verdict::of(
        ok_s && ok_l && ns == 10 && nl == 40,
        format!(
            "degrees 0..4: self-recovery {own:.1e} (tol {:.0e}), leakage {leak:.1e} (tol {:.0e})",
            suites::CIRCLE_SELF_TOL,
            suites::CIRCLE_LEAK_TOL
        ),
    )
}

fn classification() -> Verdict {
    let r = suite("classification");
    let canon: Vec<&Row> = r.check("canonical").collect();
    let random: Vec<&Row> = r.check("random").collect();
    let excluded = r.check("excluded").count();
    let agree = random.iter().filter(|x| x.pass).count();
    let ok = canon.len() == 3 && canon.iter().all(|x| x.pass) && agree == random.len() && random.len() + excluded == suites::RANDOM_SECTIONS;
    Verdict::of(
        ok,
        format!(
            "{agree}/{} random sections agree with the oracle ({excluded} within {:.0e} of a boundary excluded); canonical cases {}/3",
            random.len(),
            suites::CLASS_BOUNDARY_EXCLUSION,
            canon.iter().filter(|x| x.pass).count()
        ),
    )
}

fn transform_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("determinism.json");
    let cfg = r#"{
        "experiment_id": "determinism",
        "space": {"signature": [1, 2]},
        "function": {"kind": "sum", "terms": [
            {"kind": "bump", "center": [1.118033988749895, 0.5, 0.0], "radius": 0.9},
            {"kind": "modulated", "center": [1.0, 0.0, 0.0], "radius": 0.8, "direction": [0.0, 1.0, 0.5], "weight": 0.5}
        ]},
        "sections": {"random": {"count": 4, "p_range": [-0.4, 0.4]}},
        "refinements": [{"rel_tol": 1e-6}, {"rel_tol": 1e-10}]
    }"#;
    std::fs::write(&path, cfg).expect("write config");
    path
}

fn run_transform(config: &Path, out: &Path, seed: u64, threads: Option<&str>) -> Vec<u8> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_horokit"));
    cmd.args(["transform", "--config"]).arg(config).args(["--seed", &seed.to_string(), "--out"]).arg(out);
    if let Some(t) = threads {
        cmd.env("HOROKIT_THREADS", t);
    }
    let status = cmd.output().expect("spawn horokit");
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    std::fs::read(out.join("determinism.csv")).expect("csv written")
}

fn infrastructure() -> Verdict {
    let tmp = tempfile::tempdir().expect("tempdir");
    let config = transform_config(tmp.path());
    let a = run_transform(&config, &tmp.path().join("a"), DETERMINISM_SEED, None);
    let b = run_transform(&config, &tmp.path().join("b"), DETERMINISM_SEED, Some("1"));
    let other = run_transform(&config, &tmp.path().join("c"), DETERMINISM_SEED + 1, None);
    let identical = a == b;
    let seeded = a != other;
    let r = suite("measure");
    let (dev, n, ok) = worst(r.check("invariance"));
    Verdict::of(
        identical && seeded && ok && n == 24,
        format!(
            "CSV byte-identical across runs: {identical} ({} bytes, seed changes output: {seeded}); measure invariance {dev:.1e} over {n} moves (tol {:.0e})",
            a.len(),
            suites::MEASURE_TOL
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(u8, &str, fn() -> Verdict); 10] = [
        (1, "homogeneity", homogeneity),
        (2, "ultrahyperbolic equation", ultrahyperbolic),
        (3, "exterior derivative identity", lemma1),
        (4, "fundamental form reconstruction", reconstruction),
        (5, "cycle independence", homology),
        (6, "hyperbolic inversion", hyperbolic_inversion),
        (7, "sphere inversion", sphere_inversion),
        (8, "circle action", circle_action),
        (9, "classification", classification),
        (10, "determinism and invariance", infrastructure),
    ];
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        let t = Instant::now();
        let v = run();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {tag} {name}: {} [{:.1}s]", v.detail, t.elapsed().as_secs_f64());
        let known = UNATTAINABLE.contains(&id);
        if (!v.pass && !(known && v.expected_failure)) || (v.pass && known) {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: all criteria behave as recorded (expected failures: {UNATTAINABLE:?})");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
