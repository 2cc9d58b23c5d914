use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_idp-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn crossed_segments_exit_with_witness() {
    let spec = fixture("crossed_segments.json");
    let out = run(&["idp", "--spec", path(&spec)]);
    assert_eq!(code(&out), 1);
    let report = json(&out);
    assert_eq!(report["idp"]["witnesses"], serde_json::json!([[2, 1]]));
    assert_eq!(report["sum"]["num_lattice_points"], 5);
}

#[test]
fn threefold_idp_passes_in_both_forms() {
    let spec = fixture("threefold.json");
    let heights = fixture("threefold_heights.json");
    let canonical = run(&["idp", "--spec", path(&spec), "--heights", path(&heights)]);
    assert_eq!(code(&canonical), 0);
    let fan = fixture("threefold_fan.json");
    let raw = run(&["idp", "--spec", path(&fan)]);
    assert_eq!(code(&raw), 0);
    let (a, b) = (json(&canonical), json(&raw));
    assert_eq!(a, b);
    assert_eq!(a["idp"], "pass");
    assert_eq!(a["sum"]["num_lattice_points"], 434);
}

#[test]
fn report_does_not_depend_on_workers() {
    let spec = fixture("threefold.json");
    let heights = fixture("threefold_heights.json");
    let one = run(&["--workers", "1", "decompose", "--spec", path(&spec), "--heights", path(&heights), "--all"]);
    let two = run(&["--workers", "2", "decompose", "--spec", path(&spec), "--heights", path(&heights), "--all"]);
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, two.stdout);
    assert_eq!(json(&one)["count"], 434);
    let stderr = String::from_utf8_lossy(&one.stderr);
    assert!(stderr.contains("wall"), "{stderr}");
}

#[test]
fn decompose_single_point() {
    let spec = fixture("threefold.json");
    let heights = fixture("threefold_heights.json");
    let out = run(&["decompose", "--spec", path(&spec), "--heights", path(&heights), "--alpha=-2,0,0"]);
    assert_eq!(code(&out), 0);
    let cert = json(&out);
    assert_eq!(cert["alpha"], serde_json::json!([-2, 0, 0]));
    assert_eq!(cert["beta"], serde_json::json!([0, 0, 0]));
    assert_eq!(cert["gamma"], serde_json::json!([-2, 0, 0]));
}

#[test]
fn decompose_errors() {
    let spec = fixture("threefold.json");
    let heights = fixture("threefold_heights.json");
    let outside = run(&["decompose", "--spec", path(&spec), "--heights", path(&heights), "--alpha", "100,0,0"]);
    assert_eq!(code(&outside), 3);
    let garbage = run(&["decompose", "--spec", path(&spec), "--heights", path(&heights), "--alpha", "1,x,0"]);
    assert_eq!(code(&garbage), 2);
    let plain = fixture("threefold_fan.json");
    let out = run(&["decompose", "--spec", path(&plain), "--all"]);
    assert_eq!(code(&out), 2);
    let missing = run(&["decompose", "--spec", path(&spec), "--all"]);
    assert_eq!(code(&missing), 2);
}

#[test]
fn negative_canonical_height_is_a_precondition_failure() {
    let dir = tempfile::tempdir().unwrap();
    let heights = dir.path().join("h.json");
    std::fs::write(&heights, r#"{"h":{"d":0,"e":-1,"f":0},"h_prime":{"d":0,"e":0,"f":0}}"#).unwrap();
    let spec = fixture("threefold.json");
    let out = run(&["idp", "--spec", path(&spec), "--heights", heights.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
}

#[test]
fn malformed_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(code(&run(&["idp", "--spec", bad.to_str().unwrap()])), 2);
    let unknown = dir.path().join("unknown.json");
    std::fs::write(&unknown, r#"{"foo": 1}"#).unwrap();
    assert_eq!(code(&run(&["gen", "--spec", unknown.to_str().unwrap()])), 2);
    let invalid = dir.path().join("invalid.json");
    std::fs::write(&invalid, r#"{"p": [1, 1, 1, 1, 1], "b": [], "c": []}"#).unwrap();
    assert_eq!(code(&run(&["gen", "--spec", invalid.to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["idp", "--spec", "/nonexistent/spec.json"])), 2);
    assert_eq!(code(&run(&["fans2d", "--rays", "9"])), 2);
}

#[test]
fn gen_writes_to_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("fan.json");
    let spec = fixture("threefold.json");
    let out = run(&["--out", target.to_str().unwrap(), "gen", "--spec", path(&spec)]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(report["num_maximal_cones"], 8);
    assert_eq!(report["labels"], serde_json::json!(["v1", "v2", "u1", "y1", "t1", "z1"]));
}

#[test]
fn gen_text_lists_collections() {
    let spec = fixture("threefold.json");
    let out = run(&["--format", "text", "gen", "--spec", path(&spec)]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.matches("collection").count(), 5);
}

#[test]
fn sweep_cap_and_small_grid() {
    let grid = fixture("sweep_grid.json");
    assert_eq!(code(&run(&["sweep", "--spec", path(&grid), "--max-instances", "10"])), 3);

    let dir = tempfile::tempdir().unwrap();
    let small = dir.path().join("grid.json");
    std::fs::write(&small, r#"{"n":[2,2],"b":[0,1],"c":[0,1],"d":[0,1],"e":[0,1],"f":[0,1]}"#).unwrap();
    let out = run(&["sweep", "--spec", small.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert_eq!(report["instances"], 128);
    assert_eq!(report["failures"], serde_json::json!([]));

    let typo = dir.path().join("typo.json");
    std::fs::write(&typo, r#"{"n":[2,2],"b":[0,1],"c":[0,1],"d":[0,1],"e":[0,1],"ff":[0,1]}"#).unwrap();
    assert_eq!(code(&run(&["sweep", "--spec", typo.to_str().unwrap()])), 2);
}

#[test]
fn octagon_has_a_counterexample() {
    let fan = fixture("octagon.json");
    let out = run(&["fans2d", "--fan", path(&fan), "--bound", "2"]);
    assert_eq!(code(&out), 1);
    let report = json(&out);
    assert_eq!(report["total_counterexamples"], 1);
}

#[test]
fn small_plane_fans_pass() {
    let out = run(&["fans2d", "--rays", "4", "--bound", "2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["total_counterexamples"], 0);
}
