use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_torsion-lab"));
    c.env_remove("TORSIONLAB_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad json ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const MOMENT3: &str = r#"{"pi1": ["x1", "x2"], "pi2": ["x1 - t^2", "x2 - t^3"]}"#;

#[test]
fn moment_curve_polytope() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write(dir.path(), "m3.json", MOMENT3);
    let out = run(&["polytope", "--scene", &scene]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["extreme"], serde_json::json!([["2", "2"]]));
    assert_eq!(v["weights"][0]["p"], serde_json::json!(["3/2", "3/2"]));
}

#[test]
fn torsion_profile_from_split_map_files() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = write(dir.path(), "p1.json", r#"["x1", "x2"]"#);
    let p2 = write(dir.path(), "p2.json", r#"["x1 - t^2", "x2 - t^3"]"#);
    let out = run(&["torsion", "--pi1", &p1, "--pi2", &p2, "--beta", "0,1,0"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["b"], serde_json::json!([2, 2]));
    assert_eq!(v["rho_exponent"], "1/3");
}

#[test]
fn missing_file_is_a_validation_error() {
    let out = run(&["fields", "--scene", "/nonexistent/scene.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn schema_errors_carry_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write(dir.path(), "bad.json", "{\n  \"pi1\": [\"x1\"],\n  \"pi3\": []\n}\n");
    let out = run(&["fields", "--scene", &scene]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json:3:"), "{err}");
    assert!(err.contains("pi3"), "{err}");
}

#[test]
fn bad_expression_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write(dir.path(), "s.json", r#"{"pi1": ["x1"], "pi2": ["x1 - q^2"]}"#);
    let out = run(&["fields", "--scene", &scene]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sampling_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write(dir.path(), "m3.json", MOMENT3);
    let args = ["--seed", "7", "--samples", "2048", "verify", "rwt", "--scene", scene.as_str()];
    let a = run(&args);
    let b = bin().env("TORSIONLAB_THREADS", "1").args(args).output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["seed"], 7);
    assert_eq!(v["samples"], 2048);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write(dir.path(), "m3.json", MOMENT3);
    let out_path = dir.path().join("report.json");
    let out = run(&["fields", "--scene", &scene, "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out_path).unwrap()).unwrap();
    assert_eq!(v["nilpotency"]["step"], 3);
}

#[test]
fn invalid_thread_count_is_rejected() {
    let out = bin()
        .env("TORSIONLAB_THREADS", "zero")
        .args(["polyalg", "extract", "--coeffs", "1,0,1", "--k", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn extract_reports_terms() {
    let v = json(&run(&["polyalg", "extract", "--coeffs", "1,0,1", "--k", "1"]));
    assert_eq!(v["holds"], true);
    assert_eq!((v["n1"].as_u64(), v["n2"].as_u64()), (Some(0), Some(2)));
    let v = json(&run(&["polyalg", "extract", "--coeffs", "0,0,1", "--k", "1"]));
    assert_eq!(v["holds"], false);
}

#[test]
fn refine_keeps_mass() {
    let out = run(&["polyalg", "refine", "--set", r#"[[0,"1/1000"],["999/1000",1]]"#, "--N", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["bound_holds"], true);
}

#[test]
fn malcev_diagnostics_hold() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write(dir.path(), "m2.json", r#"{"pi1": ["x1"], "pi2": ["x1 - t^2"]}"#);
    let out = run(&["malcev", "--scene", &scene]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["group_law"]["volume_preserving"], true);
    assert_eq!(v["covering_map"]["flow_equivariant"], true);
}
