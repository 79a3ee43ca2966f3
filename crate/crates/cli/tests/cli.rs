use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multiweight")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn identities_suite_passes() {
    let o = run(&["verify", "identities", "--scale", "0.1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("PASS exponent identities"));
}

#[test]
fn injected_violation_fails_sparse_with_cube() {
    let o = run(&["verify", "sparse", "--scale", "0.1", "--inject-violation"]);
    assert_eq!(code(&o), 1);
    let line = String::from_utf8_lossy(&o.stdout);
    let v: serde_json::Value = serde_json::from_str(line.lines().next().unwrap()).unwrap();
    assert!(!v["cube"].is_null(), "{v}");
    assert!(v["seed"].is_u64());
}

#[test]
fn rdf_zero_iterations_is_tail_limited() {
    let o = run(&["rdf", "--K", "0"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["tail_limited"], true);
    assert_eq!(v["certs"]["domination"], true);
}

#[test]
fn cases_pass_and_wrong_regime_is_config_error() {
    for c in ["1", "2", "3"] {
        let o = run(&["rdf", "--case", c, "--seed", "3"]);
        assert_eq!(code(&o), 0, "case {c}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = run(&["rdf", "--case", "1", "--exponents", "4,4,2,2,2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn exponent_errors_exit_2() {
    let o = run(&["extrapolate-exponents", "--p", "2,2", "--r", "4,4,1"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("index 1"));
    let o = run(&["extrapolate-exponents", "--offdiag", "2,2,2,3"]);
    assert_eq!(code(&o), 0);
    let o = run(&["--grid", "0,3", "constants"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn experiments_run_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"experiment":"lemma-ratio","grid":{"d":1,"L":3},"trials":5,"seed":9,"options":{"lemma":"paraproduct"}}"#,
    );
    let mut outs = Vec::new();
    for stem in ["a", "b"] {
        let stem = dir.path().join(stem);
        let o = run(&["experiments", "run", &cfg, "--out", stem.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        outs.push((std::fs::read(stem.with_extension("csv")).unwrap(), std::fs::read(stem.with_extension("json")).unwrap()));
    }
    assert_eq!(outs[0], outs[1]);
    let csv = String::from_utf8(outs[0].0.clone()).unwrap();
    assert!(csv.starts_with("trial,seed,constant,lhs,rhs,ratio\n"));
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn bad_config_exits_2_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"experiment":"multilinear-extrapolate","grid":{"d":1,"L":3},"exponents":{"p":"2,2","r":"4,4,1"},"trials":1000000000,"seed":0}"#,
    );
    let o = run(&["experiments", "run", &cfg]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("config error"));
    let o = run(&["experiments", "run", "/nonexistent/x.json"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn sparse_check_passes() {
    let o = run(&["sparse-check", "--grid", "2,3", "--seed", "4"]);
    assert_eq!(code(&o), 0);
    let o = run(&["sparse-check", "--zeta", "1.5"]);
    assert_eq!(code(&o), 2);
}
