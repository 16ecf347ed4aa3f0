// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use metrokit_cli::{ResolvedRun, RunConfig, RunOptions};
use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn metrokit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metrokit")).args(args).output().expect("binary runs")
}

fn run_config(config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    metrokit(&args)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn read_table(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

/// QFI of a qubit with Bloch vector `r` and derivative `dr`.
fn bloch_qfi(r: [f64; 3], dr: [f64; 3]) -> f64 {
    let dot = |a: [f64; 3], b: [f64; 3]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    dot(dr, dr) + dot(r, dr).powi(2) / (1.0 - dot(r, r))
}

#[test]
fn dephasing_fixture_matches_bloch_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(&configs().join("qfi_dephasing.json"), dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let result = read_json(&dir.path().join("result.json"));
    // |+> under exp(-i x sz) then dephasing with p = 0.75 at x = 0.3.
    let (s, x) = (2.0 * 0.75 - 1.0, 0.3f64);
    let r = [s * (2.0 * x).cos(), s * (2.0 * x).sin(), 0.0];
    let dr = [-2.0 * s * (2.0 * x).sin(), 2.0 * s * (2.0 * x).cos(), 0.0];
    let oracle = bloch_qfi(r, dr);
    let value = result["value"].as_f64().unwrap();
    assert!((value - oracle).abs() < 1e-3, "{value} vs {oracle}");
    assert!((value - 1.0).abs() < 1e-3);
    for rec in result["records"].as_array().unwrap() {
        assert!((rec["value"].as_f64().unwrap() - oracle).abs() < 1e-3, "{rec}");
    }
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["command"], "qfi");
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(read_table(&dir.path().join("table.csv")).len(), 2);
}

#[test]
fn single_photon_likelihood_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(&configs().join("mzi_likelihood.json"), dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_table(&dir.path().join("table.csv"));
    assert_eq!(rows.len(), metrokit::mzi::GRID_SIZE);
    for row in rows {
        let v: Vec<f64> = row.iter().map(|s| s.parse().unwrap()).collect();
        let t = 0.5 * (v[0] - 0.25);
        assert!((v[1] - t.sin().powi(2)).abs() < 1e-15);
        assert!((v[2] - t.cos().powi(2)).abs() < 1e-15);
    }
}

#[test]
fn malformed_config_exits_2_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let cases = [
        "{ not json",
        r#"{"command": "qfi", "parameters": {}, "extra": 1}"#,
        r#"{"command": "teleport", "parameters": {}}"#,
        r#"{"command": "qfi", "parameters": {"source": {"kind": "channel", "channel": {"kind": "dephasing", "p": 2.0}}}}"#,
        r#"{"command": "adaptive-mzi", "parameters": {"photons": 2, "task": {"mode": "run", "policy": {"kind": "offline", "deltas": [0.1]}}}}"#,
        r#"{"command": "qec-code", "parameters": {"generator": {"dim": 2, "re": [[1, 0], [0, -1]], "im": [[0, 0], [0, 0]]}, "noise": [], "unknown": true}}"#,
    ];
    for (i, text) in cases.iter().enumerate() {
        let cfg = dir.path().join(format!("bad{i}.json"));
        std::fs::write(&cfg, text).unwrap();
        let out = run_config(&cfg, &out_dir, &[]);
        assert_eq!(out.status.code(), Some(2), "case {i}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out_dir.exists(), "case {i} left artifacts");
    }
}

#[test]
fn numerical_failure_exits_3_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("pure.json");
    // The derivative leaves the support of the pure state.
    std::fs::write(
        &cfg,
        r#"{"command": "qfi", "parameters": {"source": {"kind": "state",
            "rho": {"dim": 2, "re": [[1, 0], [0, 0]], "im": [[0, 0], [0, 0]]},
            "drho": {"dim": 2, "re": [[0, 0], [0, 0]], "im": [[0, 0], [0, 0]]}}}}"#,
    )
    .unwrap();
    let ok = run_config(&cfg, &dir.path().join("ok"), &[]);
    assert!(ok.status.success());
    std::fs::write(
        &cfg,
        r#"{"command": "qfi", "parameters": {"source": {"kind": "state",
            "rho": {"dim": 2, "re": [[1, 0], [0, 0]], "im": [[0, 0], [0, 0]]},
            "drho": {"dim": 2, "re": [[0.5, 0], [0, -0.5]], "im": [[0, 0], [0, 0]]}}}}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("fail");
    let out = run_config(&cfg, &out_dir, &[]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = read_json(&out_dir.join("manifest.json"));
    assert_eq!(manifest["status"], "numerical_failure");
    assert!(manifest["diagnostics"].as_str().unwrap().contains("SLD"));
    assert!(!out_dir.join("result.json").exists());
}

#[test]
fn identical_config_and_seed_give_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["mzi_sweep.json", "grape_dephasing.json", "qec_sigma_z.json"] {
        let a = dir.path().join(format!("a-{name}"));
        let b = dir.path().join(format!("b-{name}"));
        assert!(run_config(&configs().join(name), &a, &[]).status.success());
        assert!(run_config(&configs().join(name), &b, &["--jobs", "1"]).status.success());
        for file in ["result.json", "table.csv"] {
            assert_eq!(std::fs::read(a.join(file)).unwrap(), std::fs::read(b.join(file)).unwrap(), "{name}/{file}");
        }
        let (ma, mb) = (read_json(&a.join("manifest.json")), read_json(&b.join("manifest.json")));
        assert_eq!(ma["config_sha256"], mb["config_sha256"]);
    }
}

#[test]
fn seed_override_changes_hash_and_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"command": "adaptive-mzi", "parameters": {"photons": 6, "task": {"mode": "run", "policy": {"kind": "online"}}}}"#,
    )
    .unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run_config(&cfg, &a, &["--seed", "1"]).status.success());
    assert!(run_config(&cfg, &b, &["--seed", "2"]).status.success());
    let (ra, rb) = (read_json(&a.join("result.json")), read_json(&b.join("result.json")));
    assert_eq!(ra["seed"], 1);
    assert_eq!(rb["seed"], 2);
    assert_ne!(ra["phi_true"], rb["phi_true"]);
    for r in [&ra, &rb] {
        assert_eq!(r["record"]["outcomes"].as_array().unwrap().len(), 6);
        assert!(r["holevo_variance"].as_f64().unwrap() >= 0.0);
    }
    let (ma, mb) = (read_json(&a.join("manifest.json")), read_json(&b.join("manifest.json")));
    assert_ne!(ma["config_sha256"], mb["config_sha256"]);
}

#[test]
fn dry_run_prints_plan_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = run_config(&configs().join("state_opt.json"), &out_dir, &["--dry-run"]);
    assert!(out.status.success());
    let plan: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(plan["command"], "state-opt");
    assert_eq!(plan["parameters"]["omega"], 1.0);
    assert_eq!(plan["parameters"]["config"]["max_iter"], 2000);
    assert!(!out_dir.exists());
}

#[test]
fn every_example_config_resolves() {
    let mut names: Vec<_> = std::fs::read_dir(configs()).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    assert!(names.len() >= 7);
    let mut commands = std::collections::BTreeSet::new();
    for path in names {
        let cfg = RunConfig::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let opts = RunOptions { seed: None, out: Some("unused".into()) };
        let resolved = ResolvedRun::new(cfg, &opts).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        commands.insert(resolved.config.command.name());
    }
    assert_eq!(commands.len(), 7, "{commands:?}");
}

#[test]
fn missing_output_dir_is_a_schema_error() {
    let cfg = RunConfig::from_json(r#"{"command": "qfi", "parameters": {}}"#).unwrap();
    let err = ResolvedRun::new(cfg, &RunOptions::default()).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn qec_and_probe_commands() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("qec");
    assert!(run_config(&configs().join("qec_sigma_z.json"), &q, &[]).status.success());
    let r = read_json(&q.join("result.json"));
    assert_eq!(r["hnls"], true);
    assert_eq!(r["verification"]["passes"], true);
    assert!((r["effective_qfi"].as_f64().unwrap() - 16.0).abs() < 1e-9);
    let primal = r["optimal_gap"]["primal"].as_f64().unwrap();
    let dual = r["optimal_gap"]["dual"].as_f64().unwrap();
    assert!((primal - 2.0 * dual).abs() < 1e-6);

    // Verifying the code written by the first run reproduces its report.
    let cfg = dir.path().join("verify.json");
    let mut doc = read_json(&configs().join("qec_sigma_z.json"));
    doc["parameters"]["code"] = r["code"].clone();
    std::fs::write(&cfg, doc.to_string()).unwrap();
    let v = dir.path().join("verify");
    assert!(run_config(&cfg, &v, &[]).status.success());
    assert_eq!(read_json(&v.join("result.json"))["verification"], r["verification"]);

    let p = dir.path().join("probe");
    assert!(run_config(&configs().join("optimal_probe.json"), &p, &[]).status.success());
    let r = read_json(&p.join("result.json"));
    let expected = 4.0 * (2.0 * 0.9 - 1.0f64).powi(2);
    for rec in r["records"].as_array().unwrap() {
        assert!((rec["value"].as_f64().unwrap() - expected).abs() < 1e-3, "{rec}");
    }
    assert_eq!(r["ancilla_free"], true);
}

#[test]
fn grape_reads_initial_field_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let field = metrokit::control::ControlField::constant(50, &[0.1, 0.0, -0.2]);
    let csv_path = dir.path().join("field.csv");
    std::fs::write(&csv_path, field.to_csv().unwrap()).unwrap();
    let mut doc = read_json(&configs().join("grape_dephasing.json"));
    doc["parameters"]["init"] = serde_json::json!({"kind": "csv", "path": csv_path});
    doc["parameters"]["config"]["iterations"] = 3.into();
    let cfg = dir.path().join("grape.json");
    std::fs::write(&cfg, doc.to_string()).unwrap();
    let out = dir.path().join("out");
    assert!(run_config(&cfg, &out, &[]).status.success());
    let history: Vec<f64> = read_table(&out.join("table.csv")).iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(history.len(), 4);
    assert!(history.windows(2).all(|w| w[1] >= w[0]));

    std::fs::write(&csv_path, "V1,V2,V3\n0.1,0.2\n").unwrap();
    let bad = dir.path().join("bad");
    assert_eq!(run_config(&cfg, &bad, &[]).status.code(), Some(2));
    assert!(!bad.exists());
}
