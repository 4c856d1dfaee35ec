use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fsi-split"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn exit_code(cmd: &mut Command) -> i32 {
    cmd.output().unwrap().status.code().unwrap()
}

#[test]
fn missing_config_is_a_usage_error() {
    assert_eq!(exit_code(bin().arg("run")), 1);
    assert_eq!(exit_code(bin().arg("frobnicate")), 1);
}

#[test]
fn rest_run_writes_zero_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let code = exit_code(bin().args(["run", "--config"]).arg(config("rest.toml")).arg("--out").arg(dir.path()));
    assert_eq!(code, 0);
    let ledger = std::fs::read_to_string(dir.path().join("energy_ledger.csv")).unwrap();
    let mut lines = ledger.lines();
    assert!(lines.next().unwrap().starts_with("step,t,E_half,E_full,D,"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 6);
    for row in rows {
        let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols[2], 0.0);
        assert_eq!(cols[3], 0.0);
        assert_eq!(cols[4], 0.0);
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["stop_reason"], "completed");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert!(manifest["files"].as_array().unwrap().len() >= 3);
}

#[test]
fn degenerate_start_is_a_result_not_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let code = exit_code(bin().args(["run", "--config"]).arg(config("degenerate.toml")).arg("--out").arg(dir.path()));
    assert_eq!(code, 0);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["stop_reason"], "domain_degenerate");
    assert_eq!(summary["stop_step"], 0);
}

#[test]
fn invalid_config_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[time]\ndt = -0.1\nt_end = 1.0\n").unwrap();
    assert_eq!(exit_code(bin().args(["validate-config", "--config"]).arg(&bad)), 2);
    std::fs::write(&bad, "[time]\nscheme = \"fluid_first\"\n").unwrap();
    assert_eq!(exit_code(bin().args(["validate-config", "--config"]).arg(&bad)), 2);
    for name in ["rest.toml", "degenerate.toml", "free_oscillation.toml", "poiseuille.toml"] {
        assert_eq!(exit_code(bin().args(["validate-config", "--config"]).arg(config(name))), 0, "{name}");
    }
}
