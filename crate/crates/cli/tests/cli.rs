use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn cayley(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cayley")).args(args).output().expect("spawn cayley")
}

fn fixture(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn rows(idx: &[usize], dim: usize) -> String {
    idx.iter()
        .map(|&i| (1..=dim).map(|j| if i == j { "1" } else { "0" }).collect::<Vec<_>>().join(" ") + "\n")
        .collect()
}

fn classify(path: &Path, extra: &[&str]) -> (Output, Value) {
    let mut args = vec!["classify-plane", path.to_str().unwrap(), "--quiet"];
    args.extend(extra);
    let out = cayley(&args);
    let json = report(&out);
    (out, json)
}

#[test]
fn standard_complex_plane() {
    let dir = TempDir::new().unwrap();
    let (out, r) = classify(&fixture(&dir, "std.txt", &rows(&[1, 2, 3, 4], 8)), &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(r["results"]["cayley"], true);
    assert_eq!(r["results"]["complex"], true);
    assert_eq!(r["results"]["angles"], serde_json::json!([0.0, 0.0]));
}

#[test]
fn special_lagrangian_plane() {
    let dir = TempDir::new().unwrap();
    let (out, r) = classify(&fixture(&dir, "sl.txt", &rows(&[1, 3, 6, 8], 8)), &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(r["results"]["cayley"], true);
    assert_eq!(r["results"]["complex"], false);
    let half_pi = std::f64::consts::FRAC_PI_2;
    for a in r["results"]["angles"].as_array().unwrap() {
        assert!((a.as_f64().unwrap() - half_pi).abs() < 1e-12);
    }
}

#[test]
fn generic_plane_is_neither() {
    let dir = TempDir::new().unwrap();
    let body = "3/5 4/5 0 0 0 0 0 0\n0 0 12/13 0 5/13 0 0 0\n0 0 0 0 0 1 0 0\n0 0 0 0 0 0 3/5 -4/5\n";
    let (out, r) = classify(&fixture(&dir, "generic.txt", body), &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(r["results"]["cayley"], false);
    assert_eq!(r["results"]["complex"], false);
}

#[test]
fn complex_mode_plane() {
    let dir = TempDir::new().unwrap();
    // J pairs (e1, e2) and (e3, e4): span{e1, e2} is a complex line in ℂ²
    let (out, r) = classify(&fixture(&dir, "c2.txt", "1 0 0 0\n0 1 0 0\n"), &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(r["results"]["mode"], "complex");
    assert_eq!(r["results"]["complex"], true);

    // span{e1, e3} is Lagrangian
    let (_, r) = classify(&fixture(&dir, "lag.txt", "1 0 0 0\n0 0 1 0\n"), &[]);
    assert_eq!(r["results"]["complex"], false);
    assert_eq!(r["results"]["angles"], serde_json::json!([std::f64::consts::FRAC_PI_2]));
}

#[test]
fn non_orthonormal_rows_warn_or_reject() {
    let dir = TempDir::new().unwrap();
    let path = fixture(&dir, "skew.txt", "1 1 0 0 0 0 0 0\n0 0 1 0 0 0 0 0\n0 0 0 0 1 0 0 0\n0 0 0 0 0 0 1 0\n");
    let (out, r) = classify(&path, &[]);
    assert_eq!(out.status.code(), Some(0));
    let orth = r["checks"].as_array().unwrap().iter().find(|c| c["name"] == "plane.orthonormal").unwrap();
    assert_eq!(orth["status"], "warn");
    assert_eq!(cayley(&["classify-plane", path.to_str().unwrap(), "--strict"]).status.code(), Some(4));
}

#[test]
fn malformed_plane_exits_4_without_report() {
    let dir = TempDir::new().unwrap();
    let plane = fixture(&dir, "bad.txt", &rows(&[1, 2, 3], 8));
    let json = dir.path().join("report.json");
    let out = cayley(&["classify-plane", plane.to_str().unwrap(), "--json", json.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(!json.exists());

    let garbage = fixture(&dir, "garbage.txt", "1 0 x 0\n");
    assert_eq!(cayley(&["classify-plane", garbage.to_str().unwrap()]).status.code(), Some(4));
}

#[test]
fn missing_file_exits_3() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.txt");
    assert_eq!(cayley(&["classify-plane", missing.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(cayley(&["run", "structure", "--tol", "-1"]).status.code(), Some(2));
    assert_eq!(cayley(&["index", "--sign", "1"]).status.code(), Some(2));
    assert_eq!(cayley(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn index_from_topology_and_chern() {
    let out = cayley(&["index", "--sign", "-16", "--euler", "24", "--self-int", "0", "--quiet"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["results"]["index"], 4);

    // K3: c1² = 0, c2 = 24
    let out = cayley(&["index", "--c1sq", "0", "--c2", "24", "--c2nu", "0", "--quiet"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["results"]["index"], 4);

    let out = cayley(&["index", "--sign", "1", "--euler", "0", "--self-int", "0", "--quiet"]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn verify_structure_exact_passes() {
    let out = cayley(&["verify-structure", "--quiet"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["summary"]["fail"], 0);
    assert_eq!(r["config"]["backend"], "exact");
}

#[test]
fn graph_solve_and_verify() {
    let dir = TempDir::new().unwrap();
    let seed = fixture(&dir, "seed.txt", "0 0 0 0\n1/10 0 0 0\n0 -1/20 0 0\n0 0 0 1/10\n");
    let out = cayley(&["graph-solve", seed.to_str().unwrap(), "--quiet"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(report(&out)["results"]["tau_norm"].as_f64().unwrap() < 1e-8);

    // the zero graph is the base plane itself
    let zero = fixture(&dir, "zero.txt", "0 0 0 0\n0 0 0 0\n0 0 0 0\n0 0 0 0\n");
    let out = cayley(&["graph-verify", zero.to_str().unwrap(), "--quiet"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["results"]["cayley"], true);
}

#[test]
fn complex_graph_file() {
    let dir = TempDir::new().unwrap();
    // m = 2, p = 1: λ over normals (e2, e4); μ completed from λ
    let path = fixture(&dir, "cg.txt", "1/2 -1/3\n");
    let out = cayley(&["graph-verify", path.to_str().unwrap(), "--quiet"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["results"]["mu_completed_from_lambda"], true);
    assert_eq!(r["results"]["linear_terms_vanish"], true);
}

#[test]
fn torus_single_truncation() {
    let out = cayley(&["torus", "--K", "1", "--backend", "float", "--samples", "5", "--quiet"]);
    let r = report(&out);
    let names: Vec<&str> = r["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"torus.kernel.K1"));
    assert!(!names.contains(&"torus.kernel.K2"));
}

#[test]
fn json_file_matches_stdout() {
    let dir = TempDir::new().unwrap();
    let json = dir.path().join("r.json");
    let to_file = cayley(&["run", "index", "--quiet", "--json", json.to_str().unwrap()]);
    let to_stdout = cayley(&["run", "index", "--quiet"]);
    assert_eq!(to_file.status.code(), Some(0));
    assert!(to_file.stdout.is_empty());
    assert_eq!(std::fs::read(&json).unwrap(), to_stdout.stdout);
}

#[test]
fn float_backend_structure() {
    let out = cayley(&["run", "structure", "--backend", "float", "--quiet"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["config"]["backend"], "float");
}
