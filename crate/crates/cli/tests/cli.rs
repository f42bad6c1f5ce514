//! End-to-end tests of the `qpv` binary.

use std::path::Path;
use std::process::{Command, Output};

fn qpv(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpv"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn run_exact_teleport_reports_certain_success() {
    let dir = tempfile::tempdir().unwrap();
    let out = qpv(
        dir.path(),
        &[
            "run",
            "--protocol",
            "p1",
            "--attack",
            "teleport-1epr",
            "--mode",
            "exact",
            "--seed",
            "5",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    let p = report["results"][0]["exact"]["probability"].as_f64().unwrap();
    assert!((p - 1.0).abs() < 1e-12);
    assert_eq!(report["config"]["seed"].as_u64(), Some(5));
    assert!(!report["transcript_sample"].as_array().unwrap().is_empty());
}

#[test]
fn identical_configs_produce_identical_result_rows() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "run",
        "--protocol",
        "p2-mod",
        "--attack",
        "5epr",
        "--mode",
        "both",
        "--trials",
        "3000",
        "--seed",
        "99",
    ];
    let mut rows = Vec::new();
    for name in ["a.json", "b.json"] {
        let mut full = args.to_vec();
        full.extend_from_slice(&["--out", name]);
        let out = qpv(dir.path(), &full);
        assert!(out.status.success(), "{}", stderr(&out));
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(name)).unwrap())
                .unwrap();
        rows.push(serde_json::to_vec(&v["results"]).unwrap());
    }
    assert_eq!(rows[0], rows[1]);
}

#[test]
fn incompatible_attack_exits_two_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let out = qpv(dir.path(), &["run", "--protocol", "p1", "--attack", "full"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("full") && err.contains("p1"), "{err}");
}

#[test]
fn bad_geometry_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = qpv(
        dir.path(),
        &[
            "run",
            "--protocol",
            "p1",
            "--attack",
            "intercept",
            "--e0-pos",
            "1.5",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("E0"));
}

#[test]
fn missing_protocol_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = qpv(dir.path(), &["run"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_seed_is_drawn_and_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let out = qpv(
        dir.path(),
        &[
            "run",
            "--protocol",
            "p1",
            "--mode",
            "mc",
            "--trials",
            "100",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert!(report["config"]["seed"].is_u64());
}

#[test]
fn sweep_writes_csv_with_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = qpv(
        dir.path(),
        &[
            "sweep",
            "--protocol",
            "p1-oracle",
            "--attack",
            "hybrid",
            "--n",
            "3",
            "--m",
            "0..8",
            "--mode",
            "exact",
            "--seed",
            "7",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 10); // header + 9 rows
    assert!(lines[0].starts_with("param,value,"));
    assert!(lines[1].starts_with("m,0,"));
    assert!(lines[9].starts_with("m,8,"));
}

#[test]
fn sweep_requires_exactly_one_range() {
    let dir = tempfile::tempdir().unwrap();
    let out = qpv(dir.path(), &["sweep", "--protocol", "p1", "--trials", "100"]);
    assert_eq!(out.status.code(), Some(2));

    let out = qpv(
        dir.path(),
        &[
            "run",
            "--protocol",
            "p1-oracle",
            "--attack",
            "hybrid",
            "--m",
            "0..8",
        ],
    );
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("scenario.json"),
        r#"{"protocol": "p2", "attack": "1epr", "mode": "exact", "seed": 21}"#,
    )
    .unwrap();
    let out = qpv(dir.path(), &["run", "--config", "scenario.json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["config"]["protocol"].as_str(), Some("p2"));
    assert_eq!(report["config"]["seed"].as_u64(), Some(21));

    // Flag overrides the file's seed.
    let out = qpv(
        dir.path(),
        &["run", "--config", "scenario.json", "--seed", "77"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["config"]["seed"].as_u64(), Some(77));

    std::fs::write(dir.path().join("bad.json"), r#"{"protcol": "p2"}"#).unwrap();
    let out = qpv(dir.path(), &["run", "--config", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("protcol"));
}

#[test]
fn local_attack_report_carries_inference_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = qpv(
        dir.path(),
        &[
            "run",
            "--protocol",
            "p2",
            "--attack",
            "local",
            "--alpha",
            "1",
            "--beta",
            "0",
            "--mode",
            "exact",
            "--seed",
            "1",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("inference_error"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    let err = report["results"][0]["inference_error"].as_f64().unwrap();
    assert!((err - 0.25).abs() < 1e-12);
}

#[test]
fn every_protocol_attack_pair_is_runnable() {
    let dir = tempfile::tempdir().unwrap();
    let protocols = ["p1", "p1-mod", "p2", "p2-mod", "p1-oracle", "p2-oracle"];
    let attacks = [
        "honest",
        "intercept",
        "teleport-1epr",
        "2epr",
        "1epr-heuristic",
        "local",
        "1epr",
        "5epr",
        "2n",
        "hybrid",
        "full",
        "naive-wait",
    ];
    let mut runnable = 0;
    for protocol in protocols {
        for attack in attacks {
            let out = qpv(
                dir.path(),
                &[
                    "run",
                    "--protocol",
                    protocol,
                    "--attack",
                    attack,
                    "--mode",
                    "mc",
                    "--trials",
                    "40",
                    "--seed",
                    "3",
                    "--n",
                    "2",
                    "--m",
                    "2",
                    "--out",
                    "pair.json",
                ],
            );
            match out.status.code() {
                Some(0) => runnable += 1,
                Some(2) => {} // incompatible pair, rejected up front
                other => panic!("{protocol}/{attack}: unexpected exit {other:?}: {}", stderr(&out)),
            }
        }
    }
    // 6 honest + 11 attack/protocol pairings from the compatibility matrix
    // (naive-wait on all 6, local on 3, 9 dedicated pairings).
    assert_eq!(runnable, 24, "compatibility matrix drifted");
}
