use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modpforms")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).expect("json on stdout")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn delta_mod_5_text_line() {
    let out = run(&["--p", "5", "--prec", "4", "basis", "--weight", "12", "--kind", "cusp"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "p=5 k=12 prec=4; 0 1 1 2\n");
}

#[test]
fn cokernel_rank_law_at_weight_60() {
    let out = run(&["--p", "5", "cokernel", "--weight", "60", "--kind", "cusp"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["j_of_k"], 12);
    assert_eq!(v["dim_cokernel"], v["dim_mjk"]);
    assert_eq!(v["verdict"], true);
}

#[test]
fn unramified_descriptor_weights() {
    let dir = tempfile::tempdir().unwrap();
    let d = write(dir.path(), "d.json", r#"{"p":5,"case":"unramified"}"#);
    let out = run(&["serre-weight", "--descriptor", &d]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "{\"k\":1,\"k_no\":25}\n");
    let traced = json(&run(&["serre-weight", "--descriptor", &d, "--trace"]));
    assert!(traced["case_trace"].is_string());
}

#[test]
fn bad_prime_is_a_precondition_error() {
    let out = run(&["--p", "4", "basis", "--weight", "12"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "InvalidPrime");
}

#[test]
fn weight_changing_operator_has_no_square_matrix() {
    let out = run(&["--p", "5", "hecke", "--weight", "12", "--op", "Vp"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_is_rejected_for_json_only_commands() {
    let out = run(&["--p", "5", "--format", "csv", "cokernel", "--weight", "24"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn hecke_matrix_on_delta() {
    let out = run(&["--p", "5", "hecke", "--weight", "12", "--space", "cusp", "--op", "T2"]);
    // tau(2) = -24 = 1 mod 5
    assert_eq!(stdout(&out), "1\n");
    let v = json(&run(&["--p", "5", "--format", "json", "hecke", "--weight", "12", "--kind", "cusp", "--op", "T2"]));
    assert_eq!(v["matrix"], serde_json::json!([[1]]));
    let out = run(&["--p", "7", "hecke", "--weight", "12", "--op", "T2"]);
    assert_eq!(stdout(&out).lines().count(), 2);
}

#[test]
fn theta_applied_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.txt", "p=5 k=12 prec=4; 0 1 1 2\n");
    let out = run(&["hecke", "--op", "theta", "--apply", &f]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "p=5 k=18 prec=4; 0 1 2 1\n");
    let v = json(&run(&["filtration", "--form", &f]));
    assert_eq!(v["filtration"], 12);
}

#[test]
fn scan_output_does_not_depend_on_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let e = write(dir.path(), "e.json", r#"{"T2":1}"#);
    let outs: Vec<Output> = ["1", "2", "4"]
        .iter()
        .map(|j| run(&["--p", "5", "--jobs", j, "no-scan", "--eigensystem", &e, "--kmax", "40"]))
        .collect();
    assert!(outs.iter().all(|o| o.status.code() == Some(0)));
    assert!(outs.windows(2).all(|w| w[0].stdout == w[1].stdout));
    assert_eq!(json(&outs[0])["weight"], 12);
}

#[test]
fn hilbert_csv() {
    let dir = tempfile::tempdir().unwrap();
    let r = write(dir.path(), "r.json", r#"{"p":5,"vars":["x","y"],"relations":["x^2","y^3"]}"#);
    let out = run(&["hilbert", "--ring", &r, "--trunc", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "n,H\n0,1\n1,2\n2,2\n3,1\n4,0\n");
}

#[test]
fn hilbert_compare_stabilizes() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "s.json",
        r#"[{"p":5,"vars":["x"],"relations":["x^2"]},{"p":5,"vars":["x"],"relations":["x^3"]},{"p":5,"vars":["x"],"relations":["x^4"]}]"#,
    );
    let t = write(dir.path(), "t.json", r#"{"p":5,"vars":["x"]}"#);
    let v = json(&run(&["hilbert-compare", "--sequence", &s, "--target", &t, "--imax", "3"]));
    let stab: Vec<i64> =
        v["coefficients"].as_array().unwrap().iter().map(|c| c["stabilizes_at"].as_i64().unwrap()).collect();
    assert_eq!(stab, vec![0, 0, 1, 2]);
}

const SCENARIO: &str = r#"{"p":5,"base":{"kind":"power_series","trunc":4},"selector":"least_index",
 "sequence":{"prefix":[{"cyclic":[1]}],"period":[{"free":2},{"cyclic":[2,3]}]},
 "free_rank":2,"base_change":2,
 "exact":{"split":true,"period":[{"a":{"free":1},"b":{"free":2},"c":{"free":1},"f":[[[1],[0]]],"g":[[[0]],[[1]]]}]}}"#;

#[test]
fn ultrapatch_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "sc.json", SCENARIO);
    let out = run(&["ultrapatch", "--scenario", &sc, "--depth", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict"], true);
    assert_eq!(v["patch"]["signature"], serde_json::json!([3, 3]));
    assert_eq!(v["patch"]["free_of_rank"], true);
    assert_eq!(v["patch"]["base_change"]["verdict"], true);
    assert_eq!(v["exactness"]["verdict"], true);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "p = 7\nprec = 5\nformat = \"json\"\n");
    let v = json(&run(&["--config", &cfg, "basis", "--weight", "12", "--kind", "cusp"]));
    assert_eq!((v["p"].as_u64(), v["prec"].as_u64()), (Some(7), Some(5)));
    let v = json(&run(&["--config", &cfg, "--p", "5", "basis", "--weight", "12", "--kind", "cusp"]));
    assert_eq!(v["p"], 5);
    let bad = write(dir.path(), "bad.toml", "q = 3\n");
    assert_eq!(run(&["--config", &bad, "basis", "--weight", "12"]).status.code(), Some(2));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("o.txt");
    let out = run(&["--p", "5", "--prec", "4", "--out", path.to_str().unwrap(), "basis", "--weight", "12", "--kind", "cusp"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(path).unwrap(), "p=5 k=12 prec=4; 0 1 1 2\n");
}
