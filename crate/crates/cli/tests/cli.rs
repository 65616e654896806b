use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qdsindex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdsindex"))
        .args(args)
        .env_remove("QDSINDEX_CONFIG")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn report(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON report on stdout")
}

fn strip_runtimes(v: &mut Value) {
    for r in v["records"].as_array_mut().unwrap() {
        r.as_object_mut().unwrap().remove("runtime_ms");
    }
}

fn names(v: &Value) -> Vec<String> {
    v["records"].as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap().to_string()).collect()
}

#[test]
fn residues_report_is_deterministic() {
    let args = ["residues", "--model", "circle", "--lambda", "40"];
    let mut a = report(&qdsindex(&args));
    let mut b = report(&qdsindex(&args));
    strip_runtimes(&mut a);
    strip_runtimes(&mut b);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a["schema"], 1);
    assert_eq!(a["config"]["model"]["lambda"], 40);
}

#[test]
fn summary_matches_records() {
    let o = qdsindex(&["residues", "--model", "sphere", "--lmax", "20"]);
    let v = report(&o);
    let recs = v["records"].as_array().unwrap();
    let passed = recs.iter().filter(|r| r["pass"] == true).count();
    assert_eq!(v["summary"]["total"], recs.len());
    assert_eq!(v["summary"]["passed"], passed);
    let mut sorted = names(&v);
    sorted.sort();
    assert_eq!(names(&v), sorted);
    for r in recs.iter().filter(|r| r["name"].as_str().unwrap().contains(".gamma.")) {
        assert_eq!(r["pass"], true, "{r}");
    }
    assert_eq!(code(&o), if passed == recs.len() { 0 } else { 1 });
}

#[test]
fn empty_generator_list_gives_an_empty_report() {
    let o = qdsindex(&["residues", "--model", "nctorus", "--generators", ""]);
    assert_eq!(code(&o), 0);
    assert_eq!(report(&o)["summary"]["total"], 0);
}

#[test]
fn malformed_tuple_is_a_usage_error() {
    let o = qdsindex(&["cocycle", "--model", "sphere", "z@q, x@p"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("parse error"));
}

#[test]
fn tiny_suspension_is_a_config_error() {
    let o = qdsindex(&["suspend", "--model", "circle", "--suspension-size", "1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn bad_tolerance_flag_is_a_config_error() {
    assert_eq!(code(&qdsindex(&["verify", "--tolerance", "c01"])), 2);
    assert_eq!(code(&qdsindex(&["verify", "--tolerance", "c01=-1"])), 2);
}

#[test]
fn only_filters_checks() {
    let o = qdsindex(&["verify", "--only", "c09.*"]);
    let v = report(&o);
    assert!(!names(&v).is_empty());
    assert!(names(&v).iter().all(|n| n.starts_with("c09.")));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn only_sphere_selects_sphere_checks() {
    let o = qdsindex(&["verify", "--only", "sphere", "--lmax", "24"]);
    let v = report(&o);
    assert!(names(&v).len() > 50);
    assert!(names(&v).iter().all(|n| n.contains("sphere")));
    assert!([0, 1].contains(&code(&o)));
}

#[test]
fn failing_checks_exit_one_and_are_listed() {
    // a tolerance far below the fit error of a fitted coefficient
    let o = qdsindex(&["verify", "--only", "c09.n_r.fit.1", "--tolerance", "c09.n_r.fit=1e-300"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL  c09.n_r.fit.1"));
}

#[test]
fn torus_shift_tuple_vanishes() {
    let o = qdsindex(&["cocycle", "--model", "nctorus", "S^1, S^-1, S^0"]);
    let v = report(&o);
    for r in v["records"].as_array().unwrap() {
        assert_eq!(r["pass"], true, "{r}");
    }
    assert_eq!(code(&o), 0);
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn config_file_from_env_with_flags_winning() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", "[model]\nname = \"circle\"\nlambda = 30\n\n[output]\nformat = \"csv\"\n");
    let out = dir.path().join("report.json");
    let o = Command::new(env!("CARGO_BIN_EXE_qdsindex"))
        .args(["residues", "--format", "json", "--output"])
        .arg(&out)
        .env("QDSINDEX_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["config"]["model"]["name"], "circle");
    assert_eq!(v["config"]["model"]["lambda"], 30);
    assert_eq!(v["config"]["output"]["format"], "json");
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[model]\nnmae = \"circle\"\n");
    let o = Command::new(env!("CARGO_BIN_EXE_qdsindex")).arg("residues").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn csv_output_has_one_row_per_record() {
    let o = qdsindex(&["residues", "--model", "circle", "--format", "csv"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines().filter(|l| !l.is_empty());
    assert!(lines.next().unwrap().starts_with("name,expected_re"));
    assert_eq!(lines.count(), 8);
}
