//! End-to-end runs of the command-line binary.

mod common;

use std::fs;
use std::process::{Command, Output};

use common::{corpus_path, INV_GAMMA_HALF};
use serde_json::Value;

fn fracsens(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracsens"))
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn config(name: &str) -> String {
    corpus_path(name).to_str().unwrap().to_string()
}

fn hash_line(csv: &str) -> &str {
    let first = csv.lines().next().unwrap();
    let hash = first.strip_prefix("# config_hash=").expect("hash header");
    assert_eq!(hash.len(), 64);
    assert!(hash.chars().all(|c| c.is_ascii_hexdigit()));
    hash
}

#[test]
fn solve_zero_rhs_is_constant() {
    let csv = stdout(&fracsens(&["solve", "--config", &config("zero_rhs")]));
    hash_line(&csv);
    let mut lines = csv.lines().skip(1);
    assert_eq!(lines.next(), Some("theta,tau,x"));
    let xs: Vec<f64> = lines.map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(xs.len(), 1025);
    assert!(xs.iter().all(|&x| x == 1.0));
}

#[test]
fn solve_json_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("solution.json");
    let status = fracsens(&[
        "solve",
        "--config",
        &config("constant_history"),
        "--n",
        "64",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v["config_hash"].is_string());
    assert_eq!(v["N"], 64);
}

#[test]
fn sens_zero_rhs() {
    let v: Value = serde_json::from_str(&stdout(&fracsens(&["sens", "--config", &config("zero_rhs")]))).unwrap();
    assert!(v["dt_alpha_rho"].as_f64().unwrap().abs() <= 1e-12);
    let nabla = v["nabla_alpha_rho"].as_f64().unwrap();
    assert!((nabla - INV_GAMMA_HALF).abs() <= 1e-12 * INV_GAMMA_HALF);
    assert_eq!(v["rho"].as_f64(), Some(1.0));
    assert_eq!(v["config_hash"].as_str().map(str::len), Some(64));
}

#[test]
fn sens_writes_paths() {
    let dir = tempfile::tempdir().unwrap();
    let paths = dir.path().join("paths.csv");
    let out = fracsens(&["sens", "--config", &config("sine_rhs"), "--n", "64", "--paths", paths.to_str().unwrap()]);
    stdout(&out);
    let csv = fs::read_to_string(&paths).unwrap();
    hash_line(&csv);
    assert_eq!(csv.lines().nth(1), Some("theta,tau,x,p,q"));
    assert_eq!(csv.lines().count(), 2 + 65);
}

#[test]
fn convergence_table_reaches_expected_order() {
    let csv = stdout(&fracsens(&["convergence", "--config", &config("manufactured"), "--levels", "5"]));
    hash_line(&csv);
    let rows: Vec<Vec<&str>> = csv.lines().skip(2).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 5);
    let ns: Vec<&str> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(ns, ["256", "512", "1024", "2048", "4096"]);
    let last_order: f64 = rows[4][2].parse().unwrap();
    assert!(last_order >= 1.5 - 0.15, "final order {last_order}");
}

#[test]
fn reruns_are_byte_identical() {
    for args in [
        vec!["solve", "--config", "SINE", "--n", "128"],
        vec!["sens", "--config", "SINE", "--n", "128"],
        vec!["verify-freeterm", "--config", "SINE", "--ell", "1", "--n", "64", "--samples", "3", "--kmax", "6"],
        vec!["verify-ci", "--config", "SINE", "--ell", "1", "--n", "64", "--kmax", "5"],
        vec!["appendix", "--imax", "3"],
    ] {
        let path = config("sine_rhs");
        let args: Vec<&str> = args.iter().map(|a| if *a == "SINE" { path.as_str() } else { a }).collect();
        let first = fracsens(&args);
        let second = fracsens(&args);
        assert!(first.status.success(), "{args:?}: {}", String::from_utf8_lossy(&first.stderr));
        assert_eq!(first.stdout, second.stdout, "{args:?}");
    }
}

#[test]
fn thread_cap_does_not_change_results() {
    let path = config("sine_rhs");
    let args = ["sens", "--config", path.as_str(), "--n", "128"];
    let default = fracsens(&args);
    let capped = Command::new(env!("CARGO_BIN_EXE_fracsens")).args(args).env("FRAC_SENS_THREADS", "1").output().unwrap();
    assert_eq!(default.stdout, capped.stdout);
}

#[test]
fn unknown_key_is_rejected_with_pointer() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let mut v: Value = serde_json::from_str(&fs::read_to_string(corpus_path("zero_rhs")).unwrap()).unwrap();
    v["extra"] = Value::from(1);
    fs::write(&path, v.to_string()).unwrap();
    let out = fracsens(&["solve", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/extra"));
}

#[test]
fn invalid_inputs_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad_n.json");
    let mut v: Value = serde_json::from_str(&fs::read_to_string(corpus_path("zero_rhs")).unwrap()).unwrap();
    v["N"] = Value::from(100);
    fs::write(&path, v.to_string()).unwrap();
    let out = fracsens(&["solve", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/N"));

    let missing = dir.path().join("missing.json");
    assert_eq!(fracsens(&["solve", "--config", missing.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(fracsens(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(fracsens(&["ml", "--alpha", "3", "--z", "1"]).status.code(), Some(1));
}

#[test]
fn help_documents_schema() {
    let text = stdout(&fracsens(&["--help"]));
    for needle in ["growth_gamma", "\"piecewise\"", "FRAC_SENS_THREADS", "EXIT STATUS"] {
        assert!(text.contains(needle), "help lacks {needle}");
    }
}

#[test]
fn ml_subcommand() {
    let text = stdout(&fracsens(&["ml", "--alpha", "1", "--z", "1"]));
    let v: f64 = text.trim().parse().unwrap();
    assert!((v - std::f64::consts::E).abs() <= 1e-13);
    let out = fracsens(&["ml", "--alpha", "0.5", "--z", "150"]);
    assert_eq!(out.status.code(), Some(2));
}
