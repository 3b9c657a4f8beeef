//! End-to-end checks of the binary: every emitted artifact must round-trip
//! through the documented schema parsers.

use multisle::crossing::{cardy_crossing, parse_crossing_csv};
use multisle::loewner::{parse_trace_csv, SimulationOutcome};
use multisle::montecarlo::ArchEstimate;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_multisle"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn crossing_table_matches_library() {
    let out = run(&["crossing", "--model", "percolation", "--grid", "9"]);
    assert!(out.status.success());
    let rows = parse_crossing_csv(&stdout(&out)).unwrap();
    assert_eq!(rows.len(), 9);
    for (x, p) in rows {
        assert!((p - cardy_crossing(x).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn crossing_rejects_unknown_model() {
    let out = run(&["crossing", "--model", "bond"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("unknown crossing model"), "{err}");
}

#[test]
fn simulate_report_round_trips() {
    let dir = std::env::temp_dir().join(format!("multisle-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let report_path = dir.join("report.json");
    let outcomes_path = dir.join("outcomes.jsonl");
    let traces_path = dir.join("traces.csv");
    let out = run(&[
        "simulate",
        "--kappa",
        "6",
        "--x",
        "0.4",
        "--samples",
        "12",
        "--seed",
        "5",
        "--dt",
        "2e-3",
        "--cap",
        "40",
        "--out",
        report_path.to_str().unwrap(),
        "--outcomes",
        outcomes_path.to_str().unwrap(),
        "--traces",
        traces_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let report = ArchEstimate::from_json(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    let total: u64 = report.arch_counts.values().sum();
    assert_eq!(total + report.failures, 12);
    assert_eq!(report.plan.params.kappa, 6.0);

    let outcomes: Vec<SimulationOutcome> = std::fs::read_to_string(&outcomes_path)
        .unwrap()
        .lines()
        .map(|l| SimulationOutcome::from_json(l).unwrap())
        .collect();
    assert_eq!(outcomes.len(), 12);

    let rows = parse_trace_csv(&std::fs::read_to_string(&traces_path).unwrap()).unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.4 >= 0.0), "trace points stay in the closed upper half plane");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn simulate_rejects_bad_kappa_with_message() {
    let out = run(&["simulate", "--kappa", "9", "--x", "0.3"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("κ must lie in (0,8)"), "{err}");
}

#[test]
fn simulate_normalizes_speeds_with_warning() {
    let out = run(&[
        "simulate", "--kappa", "6", "--points", "0,1", "--partition", "Z0", "--speeds", "2,2",
        "--samples", "2", "--dt", "5e-3", "--cap", "5",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("normalizing"), "expected a warning, got: {err}");
}

#[test]
fn arch_enumeration_canonical() {
    let out = run(&["arch", "--n", "6", "--m", "3"]);
    assert!(out.status.success());
    let lines: Vec<String> = stdout(&out).lines().map(String::from).collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].contains("[[1,2],[3,4],[5,6]]"));
    // counting mode
    let out = run(&["arch", "--n", "8", "--format", "csv"]);
    let body = stdout(&out);
    assert!(body.contains("8,4,14"), "{body}");
}

#[test]
fn partition_grid_and_point_modes() {
    let out = run(&["partition", "--partition", "fourpoint:1,1", "--kappa", "4", "--grid", "5"]);
    assert!(out.status.success());
    let body = stdout(&out);
    assert!(body.starts_with("x,z_pure_I,z_pure_II"));
    assert_eq!(body.lines().count(), 6);

    let out = run(&["partition", "--partition", "chordal", "--kappa", "2", "--points", "0,1,2"]);
    let body = stdout(&out);
    assert!(body.contains("value,,2.0000"), "{body}");

    let out = run(&["partition", "--partition", "chordal", "--kappa", "2", "--points", "0,1,2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["value"].as_f64().unwrap() - 2.0).abs() < 1e-10);
}

#[test]
fn classical_integrate_and_traces() {
    let dir = std::env::temp_dir().join(format!("multisle-classical-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let traces = dir.join("classical.csv");
    let out = run(&[
        "classical", "--points", "0,1", "--integrate", "1", "--dt", "1e-3", "--cap", "10",
        "--traces", traces.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["classical"], serde_json::json!(true));
    assert_eq!(v["outcome"]["classical"], serde_json::json!(true));
    let rows = parse_trace_csv(&std::fs::read_to_string(&traces).unwrap()).unwrap();
    assert!(!rows.is_empty());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn config_file_with_flag_override() {
    let dir = std::env::temp_dir().join(format!("multisle-cfg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "model = percolation\ngrid = 3\n").unwrap();
    let out = run(&["crossing", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(parse_crossing_csv(&stdout(&out)).unwrap().len(), 3);
    // flag overrides the file
    let out = run(&["crossing", "--config", cfg.to_str().unwrap(), "--grid", "7"]);
    assert_eq!(parse_crossing_csv(&stdout(&out)).unwrap().len(), 7);
    // unknown keys are hard errors
    std::fs::write(&cfg, "model = percolation\nwibble = 3\n").unwrap();
    let out = run(&["crossing", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn show_defaults() {
    let out = run(&["--show-defaults"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["cap"], serde_json::json!(50.0));
    assert!(v["threads"].as_str().unwrap().contains("MULTISLE_THREADS"));
}
