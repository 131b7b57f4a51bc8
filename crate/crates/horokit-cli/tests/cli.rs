//! End-to-end behaviour of the `horokit` binary: outputs, exit codes, determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn horokit(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_horokit")).args(args).current_dir(dir).output().expect("spawn horokit")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(cmd: &str, dir: &TempDir, config: &str) -> Output {
    let cfg = write(dir.path(), "config.json", config);
    horokit(&[cmd, "--config", cfg.to_str().unwrap(), "--out", "out"], dir.path())
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Rows as header-keyed maps; the space label is quoted, so split carefully.
fn table(text: &str) -> Vec<std::collections::HashMap<String, String>> {
    fn split(line: &str) -> Vec<String> {
        let (mut out, mut cur, mut quoted) = (Vec::new(), String::new(), false);
        for ch in line.chars() {
            match ch {
                '"' => quoted = !quoted,
                ',' if !quoted => out.push(std::mem::take(&mut cur)),
                _ => cur.push(ch),
            }
        }
        out.push(cur);
        out
    }
    let mut lines = text.lines();
    let header = split(lines.next().expect("header"));
    lines.map(|l| header.iter().cloned().zip(split(l)).collect()).collect()
}

fn csv(dir: &TempDir, stem: &str) -> Vec<std::collections::HashMap<String, String>> {
    table(&std::fs::read_to_string(dir.path().join("out").join(format!("{stem}.csv"))).expect("csv written"))
}

const SPHERE_MIN: &str = r#"{
    "experiment_id": "sphere-min",
    "space": {"signature": [3, 0]},
    "function": {"kind": "bump", "center": [0, 0, 1], "radius": 0.7},
    "sections": {"list": [{"xi": [0, 0, 1], "p": 0.5}]}
}"#;

#[test]
fn minimal_sphere_transform_writes_one_row() {
    let dir = TempDir::new().unwrap();
    let o = run("transform", &dir, SPHERE_MIN);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = csv(&dir, "sphere-min");
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    assert_eq!(r["space"], "X(3,0)");
    let value: f64 = r["value_re"].parse().unwrap();
    let err: f64 = r["err_est"].parse().unwrap();
    assert!(value.is_finite() && value != 0.0);
    assert!(err >= 0.0 && err < 1e-6 * value.abs());
    assert_eq!(r["pass"], "true");
    assert!(dir.path().join("out/sphere-min.json").exists());
}

#[test]
fn malformed_json_is_a_config_error_and_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let o = run("transform", &dir, "{\"experiment_id\": ");
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("config error"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_fields_are_rejected() {
    let dir = TempDir::new().unwrap();
    let o = run("transform", &dir, &SPHERE_MIN.replacen('{', "{\"colour\": 1,", 1));
    assert_eq!(code(&o), 2);
}

#[test]
fn unknown_suite_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let o = horokit(&["verify", "nosuch", "--out", "out"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("unknown suite"));
}

#[test]
fn zero_normal_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"experiment_id": "z", "space": {"signature": [2, 2]}, "function": {"kind": "constant"},
        "sections": {"list": [{"xi": [0, 0, 0, 0], "eta": [0, 0, 0, 0], "p": 1}]}}"#;
    let o = run("classify", &dir, cfg);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn pseudo_inversion_is_out_of_scope() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"experiment_id": "p", "space": {"signature": [2, 2]}, "function": {"kind": "constant"},
        "points": [[1, 0, 0, 0]]}"#;
    let o = run("invert", &dir, cfg);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("inversion out of scope"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn classify_on_hyperbolic_space_is_out_of_scope() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"experiment_id": "h", "space": {"signature": [1, 2]}, "function": {"kind": "constant"},
        "sections": {"list": [{"xi": [1, 1, 0], "p": 1}]}}"#;
    assert_eq!(code(&run("classify", &dir, cfg)), 4);
}

#[test]
fn singular_direct_quadrature_is_a_numerical_error() {
    let dir = TempDir::new().unwrap();
    // p = 0.9 cuts through the support, so the kernel has a real pole
    let cfg = SPHERE_MIN.replacen('{', "{\"mode\": \"direct\",", 1).replace("\"p\": 0.5", "\"p\": 0.9");
    let o = run("transform", &dir, &cfg);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("singular kernel"));
}

#[test]
fn invalid_thread_count_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.json", SPHERE_MIN);
    let o = Command::new(env!("CARGO_BIN_EXE_horokit"))
        .args(["transform", "--config", cfg.to_str().unwrap(), "--out", "out"])
        .current_dir(dir.path())
        .env("HOROKIT_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn error_estimates_shrink_under_refinement_near_tangency() {
    let (a, b) = (1.0f64 / (0.3f64.powi(2) + 0.95f64.powi(2)).sqrt(), 1.0f64 / (0.2f64.powi(2) + 0.98f64.powi(2)).sqrt());
    let cfg = format!(
        r#"{{"experiment_id": "sweep", "space": {{"signature": [3, 0]}},
        "function": {{"kind": "sum", "terms": [
            {{"kind": "bump", "center": [{}, 0, {}], "radius": 0.25}},
            {{"kind": "modulated", "center": [0, {}, {}], "radius": 0.3, "direction": [1, 2, 0]}}]}},
        "sections": {{"sweep": {{"xi": [0, 0, 1], "p_re": {{"from": 0.9, "to": 0.999, "steps": 4}}}}}},
        "refinements": [{{"rel_tol": 1e-3}}, {{"rel_tol": 1e-6}}, {{"rel_tol": 1e-9}}]}}"#,
        0.3 * a,
        0.95 * a,
        0.2 * b,
        0.98 * b
    );
    let dir = TempDir::new().unwrap();
    let o = run("transform", &dir, &cfg);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = csv(&dir, "sweep");
    assert_eq!(rows.len(), 12);
    for section in rows.chunks(3) {
        let errs: Vec<f64> = section.iter().map(|r| r["err_est"].parse().unwrap()).collect();
        assert!(errs.windows(2).all(|w| w[1] <= w[0]), "{errs:?}");
        let v: Vec<f64> = section.iter().map(|r| r["value_re"].parse().unwrap()).collect();
        assert!((v[2] - v[0]).abs() <= 3.0 * errs[0], "{v:?} {errs:?}");
    }
}

#[test]
fn hyperbolic_inversion_smoke() {
    let cfg = r#"{"experiment_id": "hinv", "space": {"signature": [1, 2]},
        "function": {"kind": "bump", "center": [1.118033988749895, 0.5, 0.0], "radius": 0.9},
        "points": [[1.118033988749895, 0.5, 0.0]],
        "refinements": [{"cycle_nodes": 16}, {"cycle_nodes": 64}]}"#;
    let dir = TempDir::new().unwrap();
    let o = run("invert", &dir, cfg);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = csv(&dir, "hinv");
    assert_eq!(rows.len(), 2);
    for r in &rows {
        let truth: f64 = r["truth"].parse().unwrap();
        assert!((truth - (-1.0f64).exp()).abs() < 1e-12);
        assert!(r["rel_err"].parse::<f64>().unwrap() < 1e-6);
    }
    let svg = std::fs::read_to_string(dir.path().join("out/hinv.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
}

#[test]
fn invert_rejects_points_off_the_sheet() {
    let cfg = r#"{"experiment_id": "off", "space": {"signature": [1, 2]}, "function": {"kind": "constant"},
        "points": [[-1, 0, 0]]}"#;
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run("invert", &dir, cfg)), 2);
}

#[test]
fn canonical_pseudo_classes() {
    let cfg = r#"{"experiment_id": "cls", "space": {"signature": [2, 2]}, "function": {"kind": "constant"},
        "sections": {"list": [
            {"xi": [1.5, 0, 0, 0], "eta": [0, 1.5, 0, 0], "p": 1},
            {"xi": [1, 0, 0, 0], "eta": [0, 1, 0, 0], "p": 1},
            {"xi": [0, 0, 0.7, 0], "eta": [0, 0, 0, 0.7], "p": [0.3, -0.2]}
        ]}}"#;
    let dir = TempDir::new().unwrap();
    let o = run("classify", &dir, cfg);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = csv(&dir, "cls");
    let classes: Vec<&str> = rows.iter().map(|r| r["class"].as_str()).collect();
    assert_eq!(classes, ["interior", "tangent", "infinite"]);
    assert!(rows.iter().all(|r| r["pass"] == "true"));
}

#[test]
fn same_seed_gives_identical_bytes() {
    let cfg = r#"{"experiment_id": "rnd", "space": {"signature": [3, 0]},
        "function": {"kind": "harmonic", "degree": 2, "order": 1},
        "sections": {"random": {"count": 3}}}"#;
    let dir = TempDir::new().unwrap();
    let path = write(dir.path(), "c.json", cfg);
    let p = path.to_str().unwrap();
    let bytes = |out: &str, seed: &str| {
        let o = horokit(&["transform", "--config", p, "--seed", seed, "--out", out], dir.path());
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        std::fs::read(dir.path().join(out).join("rnd.csv")).unwrap()
    };
    let a = bytes("a", "5");
    assert_eq!(a, bytes("b", "5"));
    assert_ne!(a, bytes("c", "6"));
}

#[test]
fn fast_suites_pass_through_the_binary() {
    let dir = TempDir::new().unwrap();
    for suite in ["lemma1", "homogeneity", "measure"] {
        let o = horokit(&["verify", suite, "--out", "out"], dir.path());
        assert_eq!(code(&o), 0, "{suite}: {}", stderr(&o));
        assert!(csv(&dir, &format!("verify-{suite}")).iter().all(|r| r["pass"] == "true"));
    }
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let cfg = horokit_cli::ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e:#}", path.display()));
            assert!(cfg.space().is_ok(), "{}", path.display());
            seen += 1;
        }
    }
    assert_eq!(seen, 4);
}
