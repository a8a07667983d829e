use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run_cli(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qillum"))
        .args(args)
        .current_dir(dir)
        .env_remove("QILLUM_THREADS")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, body: &str) {
    std::fs::write(dir.join(name), body).unwrap();
}

fn records(path: &Path) -> (csv::StringRecord, Vec<csv::StringRecord>) {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header = reader.headers().unwrap().clone();
    (header, reader.records().map(|r| r.unwrap()).collect())
}

fn column(header: &csv::StringRecord, name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn manifest(dir: &Path) -> Value {
    let path = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.to_string_lossy().ends_with(".manifest.json"))
        .expect("manifest written");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.json", r#"{"M": 2, "d": 1, "kappa": 0.01, "N_B": 0.1, "colour": "red"}"#);
    let out = run_cli(&["chernoff", "--config", "c.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn invalid_parameter_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.json", r#"{"N_S": -0.1, "kappa": 0.01, "N_B": 20, "N": 1000}"#);
    let out = run_cli(&["ffsfg", "--config", "c.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_threads_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cli(&["figure1", "--threads", "0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn montecarlo_without_seed_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "mc.json",
        r#"{"model": "HyperOpa", "N_S": 0.01, "kappa": 0.01, "N_B": 20, "N": 1000, "trials": 10}"#,
    );
    let out = run_cli(&["montecarlo", "--config", "mc.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_noise_ffsfg_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.json", r#"{"N_S": 0.01, "kappa": 0.01, "N_B": 0, "N": 1000}"#);
    let out = run_cli(&["ffsfg", "--config", "c.json"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn missing_config_and_bad_out_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cli(&["opa", "--config", "absent.json"], dir.path());
    assert_eq!(out.status.code(), Some(4));

    write(dir.path(), "blocker", "");
    let out = run_cli(&["figure1", "--out", "blocker/inner"], dir.path());
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn schema_lists_config_keys_and_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cli(&["chernoff", "--config", "unused.json", "--schema"], dir.path());
    assert!(out.status.success());
    let schema: Value = serde_json::from_slice(&out.stdout).unwrap();
    let columns: Vec<&str> = schema["columns"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    for name in ["M", "d", "kappa", "N_B", "s_star", "Q", "one_minus_Q", "residual", "gain_over_d1"] {
        assert!(columns.contains(&name), "missing {name}");
    }
}

#[test]
fn config_hash_ignores_key_order() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.json", r#"{"N_S": 0.01, "kappa": 0.01, "N_B": 20, "N": [1000, 10000]}"#);
    write(dir.path(), "b.json", r#"{"N": [1000, 10000], "N_B": 20, "kappa": 0.01, "N_S": 0.01}"#);
    assert!(run_cli(&["ffsfg", "--config", "a.json", "--out", "a"], dir.path()).status.success());
    assert!(run_cli(&["ffsfg", "--config", "b.json", "--out", "b"], dir.path()).status.success());
    let (ma, mb) = (manifest(&dir.path().join("a")), manifest(&dir.path().join("b")));
    assert_eq!(ma["config_hash"], mb["config_hash"]);
    assert_eq!(ma["output"]["rows"], 2);
    assert_eq!(ma["output"]["sha256"], mb["output"]["sha256"]);
}

#[test]
fn chernoff_both_methods_agree_and_d4_gains_sixteen() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "c.json",
        r#"{"M": 4, "d": [1, 4], "kappa": 1e-7, "N_B": 1e-3, "method": "both", "N": 1000}"#,
    );
    let out = run_cli(&["chernoff", "--config", "c.json", "--threads", "1"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = records(&dir.path().join("chernoff.csv"));
    assert_eq!(rows.len(), 2);
    let residual = column(&header, "residual");
    for row in &rows {
        assert!(row[residual].parse::<f64>().unwrap().abs() <= 1e-12);
    }
    // in this regime 1 - Q scales with d^2 to leading order
    let gain: f64 = rows[1][column(&header, "gain_over_d1")].parse().unwrap();
    assert!((gain - 16.0).abs() / 16.0 < 0.02, "gain {gain}");
}

#[test]
fn montecarlo_without_target_guesses() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "mc.json",
        r#"{"model": "LoneOpa", "N_S": 0.01, "kappa": 0, "N_B": 20, "N": 10000, "trials": 4000, "seed": 5}"#,
    );
    let out = run_cli(&["montecarlo", "--config", "mc.json", "--threads", "2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = records(&dir.path().join("montecarlo.csv"));
    let row = &rows[0];
    let get = |name: &str| row[column(&header, name)].parse::<f64>().unwrap();
    assert_eq!(get("analytic_pe"), 0.5);
    assert!(get("ci_low") <= 0.5 && 0.5 <= get("ci_high"), "{row:?}");
}

#[test]
fn seed_flag_overrides_config_and_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "mc.json",
        r#"{"model": "HyperOpa", "N_S": 0.01, "kappa": 0.01, "N_B": 20, "N": 1000, "trials": 200, "seed": 1}"#,
    );
    let out = run_cli(&["montecarlo", "--config", "mc.json", "--seed", "77", "--out", "o"], dir.path());
    assert!(out.status.success());
    assert_eq!(manifest(&dir.path().join("o"))["seed"], 77);
    let (header, rows) = records(&dir.path().join("o/montecarlo.csv"));
    assert_eq!(&rows[0][column(&header, "seed")], "77");
}
