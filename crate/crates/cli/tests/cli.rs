use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

fn problem(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("problems").join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> i32 {
    mpsl::run(std::iter::once("mpsl").chain(args.iter().copied()))
}

fn out_arg(dir: &Path) -> String {
    dir.to_string_lossy().into_owned()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    assert_eq!(run(&["validate", &problem("half_value.json"), "--out", &out]), 0);
    assert_eq!(run(&["validate", &problem("bad_eta.json"), "--out", &out]), 2);
    assert_eq!(run(&["validate", "/definitely/not/here.json", "--out", &out]), 1);
    assert_eq!(run(&["spectrum", &problem("half_value.json"), "--tol", "1", "--out", &out]), 2);
    assert_eq!(run(&["spectrum", &problem("half_value.json"), "--k", "3..1", "--out", &out]), 2);
    assert_eq!(run(&["frobnicate"]), 2);
    assert_eq!(run(&["--help"]), 0);
    // λ₁ = π² is not between f0 = 4 and finf = 1.
    assert_eq!(run(&["nodal-solve", &problem("half_value.json"), "--k", "1", "--out", &out]), 4);
    // No nonlinearity section.
    assert_eq!(run(&["solve", &problem("quadratic_only.json"), "--out", &out]), 2);
}

#[test]
fn config_file_rules() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"lambda_max": 30, "bogus": 1}"#).unwrap();
    let out = out_arg(&dir.path().join("o"));
    let p = problem("half_value.json");
    assert_eq!(run(&["spectrum", &p, "--config", cfg.to_str().unwrap(), "--out", &out]), 2);

    fs::write(&cfg, r#"{"lambda_max": 30, "format": "json"}"#).unwrap();
    assert_eq!(run(&["spectrum", &p, "--config", cfg.to_str().unwrap(), "--out", &out]), 0);
    let v = json(dir.path().join("o/spectrum.json"));
    assert_eq!(v["schema_version"], 1);
    assert!(!dir.path().join("o/spectrum.csv").exists());
    // λ ≤ 30 holds λ₀, π², λ₂ only.
    assert_eq!(v["eigenpairs"].as_array().unwrap().len(), 3);

    // Flags win over the file.
    assert_eq!(run(&["spectrum", &p, "--config", cfg.to_str().unwrap(), "--lambda-max", "10", "--out", &out]), 0);
    assert_eq!(json(dir.path().join("o/spectrum.json"))["eigenpairs"].as_array().unwrap().len(), 2);
}

#[test]
fn spectrum_and_classify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    let p = problem("half_value.json");
    assert_eq!(run(&["spectrum", &p, "--lambda-max", "60", "--out", &out]), 0);
    let csv = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    let first = csv.lines().nth(1).unwrap();
    let lambda0: f64 = first.split(',').nth(1).unwrap().parse().unwrap();
    assert!((lambda0 - 1.737).abs() < 1e-3, "{first}");
    let svg = fs::read_to_string(dir.path().join("spectrum_eigenfunctions.svg")).unwrap();
    assert!(svg.contains(r#"viewBox="0 0 800 500""#));

    let other = tempfile::tempdir().unwrap();
    let from = dir.path().join("spectrum.csv");
    assert_eq!(run(&["classify", &p, "--from", from.to_str().unwrap(), "--out", &out_arg(other.path())]), 0);
    assert_eq!(fs::read_to_string(other.path().join("classify.csv")).unwrap(), csv);
    // No temporary files left behind.
    assert!(fs::read_dir(dir.path()).unwrap().all(|e| !e.unwrap().file_name().to_string_lossy().starts_with('.')));
}

#[test]
fn solve_writes_residuals() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["solve", &problem("saturating.json"), "--out", &out_arg(dir.path())]), 0);
    let v = json(dir.path().join("solve.json"));
    assert_eq!(v["kind"], "solve");
    assert!(dir.path().join("solution_0.csv").exists());
}

#[test]
fn nodal_solve_outputs() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["nodal-solve", &problem("half_value.json"), "--k", "0", "--out", &out_arg(dir.path())]), 0);
    let v = json(dir.path().join("nodal_k0.json"));
    assert_eq!(v["schema_version"], 1);
    for sign in ["plus", "minus"] {
        let csv = fs::read_to_string(dir.path().join(format!("nodal_k0_{sign}.csv"))).unwrap();
        assert!(csv.lines().count() > 10);
    }
}

#[test]
fn predict_reports_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["predict", &problem("two_sided.json"), "--k", "0..4", "--out", &out_arg(dir.path())]), 0);
    let csv = fs::read_to_string(dir.path().join("predict.csv")).unwrap();
    assert!(csv.starts_with("k,lambda,family,index,bracket_lo,bracket_hi,theorem,confirmed"));
    assert_eq!(csv.lines().count(), 5);
    assert!(!csv.contains(",false"), "{csv}");
}
