use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tropcurve")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn rays(v: &Value) -> Vec<(Vec<i64>, u64)> {
    let mut r: Vec<(Vec<i64>, u64)> = v["rays"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            let d = r["direction"].as_array().unwrap().iter().map(|x| x.as_i64().unwrap()).collect();
            (d, r["multiplicity"].as_u64().unwrap())
        })
        .collect();
    r.sort();
    r
}

#[test]
fn trop_matches_oracle_on_triangle() {
    let tri = fixture("triangle.txt");
    let trop = run(&["trop", tri.to_str().unwrap()]);
    assert!(trop.status.success());
    let oracle = run(&["oracle", tri.to_str().unwrap()]);
    assert!(oracle.status.success());
    assert_eq!(rays(&json(&trop)), rays(&json(&oracle)));
    assert_eq!(json(&trop)["complete"], Value::Bool(true));
}

#[test]
fn trop_writes_json_and_svg_files() {
    let dir = tempfile::tempdir().unwrap();
    let (j, s) = (dir.path().join("out.json"), dir.path().join("out.svg"));
    let tri = fixture("triangle.txt");
    let out = run(&[
        "trop",
        tri.to_str().unwrap(),
        "--json",
        j.to_str().unwrap(),
        "--svg",
        s.to_str().unwrap(),
        "--seed",
        "3",
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&j).unwrap()).unwrap();
    assert_eq!(report["seed"], 3);
    assert!(std::fs::read_to_string(&s).unwrap().contains("<svg"));
    // timings go to stderr only
    assert!(!out.stderr.is_empty());
}

#[test]
fn mult_of_non_ray_is_zero() {
    let tri = fixture("triangle.txt");
    let out = run(&["mult", tri.to_str().unwrap(), "--ray", "1,1"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["multiplicity"], 0);
    let out = run(&["mult", tri.to_str().unwrap(), "--ray", "-1,0"]);
    assert_eq!(json(&out)["multiplicity"], 2);
}

#[test]
fn degree_of_line() {
    let out = run(&["degree", fixture("line3.txt").to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(json(&out)["numeric_degree"], 1);
}

#[test]
fn check_knot_table() {
    let table = fixture("knot81_rays.json");
    let out = run(&["check", table.to_str().unwrap(), "--degree", "22"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["balanced"], true);
    assert_eq!(v["tropical_degree"], 22);
    let out = run(&["check", table.to_str().unwrap(), "--degree", "21"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn push_knot_slopes() {
    let table = fixture("knot81_rays.json");
    let matrix = fixture("knot81_matrix.txt");
    let strict = run(&["push", table.to_str().unwrap(), "--matrix", matrix.to_str().unwrap()]);
    assert_eq!(strict.status.code(), Some(1));
    let out = run(&[
        "push",
        table.to_str().unwrap(),
        "--matrix",
        matrix.to_str().unwrap(),
        "--drop-contracted",
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["boundary_slopes"], serde_json::json!(["-12", "0", "4"]));
    assert_eq!(v["contracted"].as_array().unwrap().len(), 2);
}

#[test]
fn bad_input_fails() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "ring x y\n1 + z\n").unwrap();
    let out = run(&["trop", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}
