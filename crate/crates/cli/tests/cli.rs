use std::path::Path;
use std::process::{Command, Output};

use rwre_core::env::PeriodicEnvironment;
use rwre_core::strip::StripSpec;

fn rwre(dir: &Path, cmd: &str, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join(format!("{cmd}-config.json"));
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join(format!("{cmd}-out"));
    Command::new(env!("CARGO_BIN_EXE_rwre"))
        .arg(cmd)
        .args(["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .args(extra)
        .output()
        .unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn rate0_reports_the_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&rwre(dir.path(), "rate0", r#"{"sigma": [0.8, 0.2]}"#, &[]));
    for r in v["rates"].as_array().unwrap() {
        assert!((r["i0"].as_f64().unwrap() - 0.2231436).abs() < 1e-7);
    }
    assert!(dir.path().join("rate0-out/manifest.json").exists());
}

#[test]
fn classify_three_laws() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("[[0.6, 0.4], [0.8, 0.2]]", "non_nestling"),
        ("[[0.5, 0.5], [0.7, 0.3]]", "marginally_nestling"),
        ("[[0.4, 0.6], [0.9, 0.1]]", "nestling"),
    ];
    for (atoms, want) in cases {
        let v = json(&rwre(dir.path(), "classify", &format!(r#"{{"law": {{"atoms": {atoms}, "kappa": 0.05}}}}"#), &[]));
        assert_eq!(v["class"], want);
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing_kappa = rwre(dir.path(), "classify", r#"{"law": {"atoms": [[0.8, 0.2]]}}"#, &[]);
    assert_eq!(missing_kappa.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing_kappa.stderr).contains("kappa"));
    let unknown = rwre(dir.path(), "rate0", r#"{"sigma": [0.8, 0.2], "sigmaa": 1}"#, &[]);
    assert_eq!(unknown.status.code(), Some(2));
    let bad_cmd = rwre(dir.path(), "frobnicate", r#"{}"#, &[]);
    assert_eq!(bad_cmd.status.code(), Some(2));
    let env = r#"{"environment": {"period": [2], "table": [[0.8, 0.2], [0.3, 0.7]]}, "n": 500}"#;
    let capped = rwre(dir.path(), "dp-return", env, &["--cap", "100"]);
    assert_eq!(capped.status.code(), Some(4));
    let no_file = Command::new(env!("CARGO_BIN_EXE_rwre"))
        .args(["rate0", "--config", dir.path().join("absent.json").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(no_file.status.code(), Some(1));
}

#[test]
fn uncertified_strip_exits_three_with_outputs() {
    let dir = tempfile::tempdir().unwrap();
    // the marginal law's strip rate cannot reach I(0) = 0 at finite scale
    let cfg = r#"{"law": {"atoms": [[0.5, 0.5], [0.7, 0.3]], "kappa": 0.1},
                  "pipeline": {"epsilon": 1e-12, "m_cap": 40}}"#;
    let out = rwre(dir.path(), "build-strip", cfg, &[]);
    if out.status.code() == Some(3) {
        assert!(dir.path().join("build-strip-out/build-strip.json").exists());
    } else {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn emitted_environments_reparse_equal() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"law": {"atoms": [[0.4, 0.1, 0.3, 0.2], [0.1, 0.4, 0.3, 0.2]], "kappa": 0.1}}"#;
    let v = json(&rwre(dir.path(), "build-strip", cfg, &[]));
    assert_eq!(v["certified"], true);
    let out = dir.path().join("build-strip-out");
    let env: PeriodicEnvironment = serde_json::from_slice(&std::fs::read(out.join("environment.json")).unwrap()).unwrap();
    let again: PeriodicEnvironment = serde_json::from_str(&serde_json::to_string(&env).unwrap()).unwrap();
    assert_eq!(env, again);
    let spec: StripSpec = serde_json::from_slice(&std::fs::read(out.join("tilted_strip.json")).unwrap()).unwrap();
    assert_eq!(spec, serde_json::from_str::<StripSpec>(&serde_json::to_string(&spec).unwrap()).unwrap());

    // the emitted files feed later runs by reference
    let rate = json(&rwre(
        dir.path(),
        "periodic-rate",
        r#"{"environment_file": "build-strip-out/environment.json"}"#,
        &[],
    ));
    assert!((rate["rate0"].as_f64().unwrap() - v["i0"].as_f64().unwrap()).abs() < 1e-8);
    let occ = json(&rwre(
        dir.path(),
        "occupation",
        r#"{"strip_file": "build-strip-out/tilted_strip.json", "targets": [0.5, 0.5], "n": 100000, "seeds": [1, 2, 3]}"#,
        &[],
    ));
    assert_eq!(occ["passed"], 3);
}

#[test]
fn seed_flag_changes_the_sample_and_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"environment": {"period": [1], "table": [[0.6, 0.4]]}, "n": 1000, "seed": 1}"#;
    let a = json(&rwre(dir.path(), "simulate", cfg, &[]));
    let b = json(&rwre(dir.path(), "simulate", cfg, &["--seed", "2"]));
    assert_ne!(a[0]["endpoint"], b[0]["endpoint"]);
    let m: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("simulate-out/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["seed"], 2);
    assert_eq!(m["config"]["start"], serde_json::json!([0]));
}

#[test]
fn every_subcommand_runs() {
    let dir = tempfile::tempdir().unwrap();
    let law = r#""law": {"atoms": [[0.4, 0.1, 0.3, 0.2], [0.1, 0.4, 0.3, 0.2]], "kappa": 0.1}"#;
    let env = r#""environment": {"period": [2], "table": [[0.8, 0.2], [0.3, 0.7]]}"#;
    let target = r#""target": {"period": [1, 2], "table": [[0.4, 0.1, 0.3, 0.2], [0.1, 0.4, 0.3, 0.2]]}"#;
    let cases = [
        ("saddle", format!("{{{law}}}")),
        ("variational", format!("{{{law}}}")),
        ("periodic-rate", format!(r#"{{{env}, "x": [0.1]}}"#)),
        ("dp-return", format!(r#"{{{env}, "n_grid": [10, 20, 40]}}"#)),
        ("simulate", format!(r#"{{{law}, "n": 100, "seeds": [1, 2]}}"#)),
        ("occupation", format!(r#"{{{law}, "n": 20000}}"#)),
        ("scan", format!(r#"{{{law}, {target}, "epsilon": 0.0, "delta": 0.3, "n": 200, "mode": "nearest"}}"#)),
        ("scan", format!(r#"{{{law}, {target}, "epsilon": 0.0, "delta": 0.3, "n_grid": [50, 100, 200], "seeds": [1, 2]}}"#)),
        ("dominant", format!(r#"{{{target}, "epsilon": 0.0, "delta": 1.0, "n_grid": [100, 200]}}"#)),
        ("blocks", format!(r#"{{{env}, "delta": 1.0, "n": 1000}}"#)),
        ("quenched-experiment", format!(r#"{{{law}, "n_grid": [20], "samples": 2000}}"#)),
        ("importance", format!(r#"{{{env}, "n": 40, "samples": 5000, "estimator": "naive"}}"#)),
        ("decomposed", format!(r#"{{{law}, "n": 1000, "runs": 10}}"#)),
    ];
    for (cmd, cfg) in cases {
        let out = rwre(dir.path(), cmd, &cfg, &["--workers", "2"]);
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let csv = std::fs::read_to_string(dir.path().join("importance-out/importance.csv")).unwrap();
    assert!(csv.starts_with("N,estimate,stderr,reference\n"));
}
