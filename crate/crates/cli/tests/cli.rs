use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn condorcet(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_condorcet"));
    cmd.args(args).env_remove("CONDORCET_THREADS");
    if let Some(t) = threads {
        cmd.env("CONDORCET_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const CONFIG: &str = r#"{
    "instance_id": "to4",
    "instance": {"generator": "total_order", "deltas": [0, 0.25, 0.25, 0.25]},
    "algorithm": "fc_cwi",
    "sweep": {"delta": [0.1]},
    "replicates": 6,
    "base_seed": 11,
    "record_wall_time": false,
    "output": {"csv": "out/runs.csv", "json": "out/summary.json"}
}"#;

#[test]
fn generate_then_hardness() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    let matrix = dir.path().join("m.json");
    fs::write(&spec, r#"{"generator": "total_order", "deltas": [0, 0.1]}"#).unwrap();
    let out = condorcet(&["generate", path(&spec), "-o", path(&matrix)], None);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let m: Value = serde_json::from_str(&fs::read_to_string(&matrix).unwrap()).unwrap();
    assert_eq!(m["k"], 2);
    assert_eq!(m["gaps"][1][0], -0.1);

    let out = condorcet(&["hardness", path(&matrix), "--delta", "0.05"], None);
    assert!(out.status.success());
    let h: Value = serde_json::from_slice(&out.stdout).unwrap();
    let want = (1.0f64 / 0.05).ln() / 0.01;
    assert!((h["h_cw"].as_f64().unwrap() - want).abs() < 1e-9 * want);
    assert_eq!(h["s_star"], serde_json::json!([0, 1]));
}

#[test]
fn run_and_summarize() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    fs::write(&cfg, CONFIG).unwrap();
    let out = condorcet(&["run", path(&cfg)], Some("2"));
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = dir.path().join("out/runs.csv");
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 7);
    let report: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/summary.json")).unwrap())
            .unwrap();
    assert_eq!(report["config"]["instance_id"], "to4");
    assert_eq!(report["summary"]["rows"][0]["replicates"], 6);
    assert!(report["summary"]["rows"][0]["h_cw"].is_number());

    // thread count does not change the table
    let serial = dir.path().join("serial.csv");
    let out = condorcet(&["run", path(&cfg), "--csv", path(&serial)], Some("1"));
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(&serial).unwrap(), text);

    let out = condorcet(&["summarize", path(&csv)], None);
    assert!(out.status.success());
    let s: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(
        s["summary"]["rows"][0]["errors"],
        report["summary"]["rows"][0]["errors"]
    );
    assert!(s["config"].is_null());
}

#[test]
fn invalid_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(
        &cfg,
        CONFIG.replace("\"replicates\": 6", "\"replicates\": 0"),
    )
    .unwrap();
    assert_eq!(condorcet(&["run", path(&cfg)], None).status.code(), Some(2));
    fs::write(&cfg, "{ not json").unwrap();
    assert_eq!(condorcet(&["run", path(&cfg)], None).status.code(), Some(2));
    fs::write(&cfg, CONFIG).unwrap();
    assert_eq!(
        condorcet(&["run", path(&cfg)], Some("zero")).status.code(),
        Some(2)
    );
}

#[test]
fn missing_winner_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("cycle.json");
    fs::write(
        &matrix,
        r#"{"k": 3, "gaps": [[0, 0.2, -0.2], [-0.2, 0, 0.2], [0.2, -0.2, 0]]}"#,
    )
    .unwrap();
    let cfg = dir.path().join("exp.json");
    let text = CONFIG.replace(
        r#"{"generator": "total_order", "deltas": [0, 0.25, 0.25, 0.25]}"#,
        r#"{"generator": "file", "path": "cycle.json"}"#,
    );
    fs::write(&cfg, text).unwrap();
    assert_eq!(condorcet(&["run", path(&cfg)], None).status.code(), Some(3));
    assert_eq!(
        condorcet(&["hardness", path(&matrix)], None).status.code(),
        Some(3)
    );
}
