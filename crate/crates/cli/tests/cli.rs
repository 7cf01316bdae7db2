use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nupbr_core::format::ModelFile;
use nupbr_core::random_time::RandomTime;
use nupbr_core::Model;
use serde_json::Value;
use tempfile::TempDir;

fn nupbr(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nupbr")).args(args).current_dir(dir).output().expect("binary runs")
}

fn write_model(dir: &Path, name: &str, model: &Model) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, ModelFile::from_model(model).to_json()).unwrap();
    path
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn worked_example_stopped_in_g_is_an_arbitrage() {
    let dir = TempDir::new().unwrap();
    let m = write_model(dir.path(), "e1.json", &Model::worked_example());
    let out = nupbr(&["check", m.to_str().unwrap(), "--filtration", "G", "--mode", "stopped"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    assert_eq!(v["verdict"], "violated");
    assert_eq!(v["certificate"]["t"], 1);
    assert_eq!(v["certificate"]["atom"], serde_json::json!([0]));
    assert_eq!(v["certificate"]["verified"], true);
    assert_eq!(v["model_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn worked_example_in_f_holds_with_a_deflator() {
    let dir = TempDir::new().unwrap();
    let m = write_model(dir.path(), "e1.json", &Model::worked_example());
    let report = dir.path().join("report.json");
    let out = nupbr(&["check", m.to_str().unwrap(), "-o", report.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(v["verdict"], "holds");
    assert_eq!(v["certificate"]["verified"], true);
}

#[test]
fn after_mode_rejects_an_infinite_tau() {
    let dir = TempDir::new().unwrap();
    let mut model = Model::worked_example();
    model.tau = RandomTime::new(vec![Some(1), None]);
    let m = write_model(dir.path(), "inf.json", &model);
    let out = nupbr(&["check", m.to_str().unwrap(), "--filtration", "G", "--mode", "after"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tau[1]"));
}

#[test]
fn malformed_rational_is_invalid_input() {
    let dir = TempDir::new().unwrap();
    let mut file = ModelFile::from_model(&Model::worked_example());
    file.assets[1][0][0] = "0.5".into();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, file.to_json()).unwrap();
    let out = nupbr(&["check", path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("assets[t=1][outcome=0]"));
}

#[test]
fn single_jump_measure_needs_a_time() {
    let dir = TempDir::new().unwrap();
    let m = write_model(dir.path(), "e1.json", &Model::worked_example());
    let out = nupbr(&["check", m.to_str().unwrap(), "--measure", "Qtilde"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = nupbr(&["check", m.to_str().unwrap(), "--measure", "Qtilde", "--at", "1"], dir.path());
    assert_eq!(json(&out)["measure"], "Qtilde");
}

#[test]
fn deflate_before_reports_invariants() {
    let dir = TempDir::new().unwrap();
    let m = write_model(dir.path(), "e1.json", &Model::worked_example());
    let out = nupbr(&["deflate", m.to_str().unwrap(), "--side", "before"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["invariants"]["positive"], true);
    assert_eq!(v["invariants"]["g_martingale"], true);
    assert_eq!(v["invariants"]["jump_ratio"]["holds"], true);
}

#[test]
fn gen_then_check_pipeline() {
    let dir = TempDir::new().unwrap();
    let out = nupbr(&["gen", "--seed", "11", "--honest-only", "-o", "g.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let again = nupbr(&["gen", "--seed", "11", "--honest-only"], dir.path());
    assert_eq!(again.stdout, std::fs::read(dir.path().join("g.json")).unwrap());
    let out = nupbr(&["deflate", "g.json", "--side", "after"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = nupbr(&["check", "g.json", "--filtration", "G", "--mode", "after"], dir.path());
    assert!(matches!(out.status.code(), Some(0 | 3)));
}

#[test]
fn theorems_are_deterministic_across_job_counts() {
    let dir = TempDir::new().unwrap();
    let run = |jobs: &str| {
        let out = nupbr(&["theorems", "--suite", "main3", "--models", "6", "--seed", "5", "--jobs", jobs], dir.path());
        assert_eq!(out.status.code(), Some(0));
        out.stdout
    };
    assert_eq!(run("1"), run("3"));
    let v: Value = serde_json::from_slice(&run("2")).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["reports"][0]["models_tested"], 6);
}

#[test]
fn theorems_with_no_models_pass() {
    let dir = TempDir::new().unwrap();
    let out = nupbr(&["theorems", "--suite", "after", "--models", "0"], dir.path());
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn unknown_suite_is_invalid_input() {
    let dir = TempDir::new().unwrap();
    let out = nupbr(&["theorems", "--suite", "nonsense", "--models", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
