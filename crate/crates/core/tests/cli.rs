//! End-to-end checks of the `offload` binary: exit codes, JSON output,
//! CSV determinism, and the OFFLOAD_SEED override.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_offload"))
}

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("offload-cli-tests");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn solve_prints_solution_json() {
    let out = bin()
        .args(["solve", "--config"])
        .arg(repo_config("solve_single.json"))
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["status"], "solved");
    assert!(json["s_p1"].as_f64().unwrap() >= 0.0);
    assert!(json["energy_total"].as_f64().unwrap() >= 0.0);
}

#[test]
fn solve_explicit_channel_and_infeasible_exit_code() {
    // Near-dead SISO channel with a tight budget: infeasible, exit code 2.
    let cfg = tmp("infeasible.json");
    fs::write(
        &cfg,
        r#"{
            "sweep": "gain_sweep",
            "profile": {
                "s_app": 4e7, "beta_ul": 1.0, "beta_dl": 0.2,
                "tau_p0": 1e-7, "tau_p1": 5e-8, "eps_p0": 8.6e-8, "l_max": 0.1
            },
            "power_model": {
                "k_tx1": 0.4, "k_tx2": 18.0, "k_rx1": 0.4, "k_rx2": 2.86e-9,
                "p_tx_mt_max": 0.1, "p_tx_fap_max": 0.1, "se_cap": 5.5
            },
            "antennas": [[1, 1]],
            "w_ul": 1e7, "w_dl": 1e7,
            "channel": {
                "h_ul": [[[1e-3, 0.0]]],
                "h_dl": [[[1e-3, 0.0]]]
            }
        }"#,
    )
    .unwrap();
    let out = bin().args(["solve", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["status"], "infeasible");
    assert!(json["l_required"].as_f64().unwrap() > 0.1);
}

#[test]
fn invalid_config_exits_one() {
    let cfg = tmp("invalid.json");
    fs::write(&cfg, r#"{"sweep": "gain_sweep"}"#).unwrap();
    let out = bin().args(["solve", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn sweep_is_deterministic() {
    let mut cfg: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(repo_config("gain_sweep.json")).unwrap()).unwrap();
    cfg["n_channels"] = 10.into();
    cfg["gamma_db_range"] = serde_json::json!([-20, 10, 40]);
    cfg["antennas"] = serde_json::json!([[4, 4], [1, 1]]);
    let cfg_path = tmp("sweep_small.json");
    fs::write(&cfg_path, cfg.to_string()).unwrap();

    let out_a = tmp("sweep_a.csv");
    let out_b = tmp("sweep_b.csv");
    for out in [&out_a, &out_b] {
        let status = bin()
            .args(["sweep", "--config"])
            .arg(&cfg_path)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = fs::read(&out_a).unwrap();
    let b = fs::read(&out_b).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "sweep output is not byte-identical");
    assert!(String::from_utf8(a).unwrap().starts_with("config_id,gamma_db,"));
}

#[test]
fn seed_env_var_changes_the_draw() {
    let mut cfg: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(repo_config("gain_sweep.json")).unwrap()).unwrap();
    cfg["n_channels"] = 5.into();
    cfg["gamma_db_range"] = serde_json::json!([10]);
    cfg["antennas"] = serde_json::json!([[4, 4]]);
    let cfg_path = tmp("sweep_seeded.json");
    fs::write(&cfg_path, cfg.to_string()).unwrap();

    let run = |seed: &str, out: &PathBuf| {
        let status = bin()
            .args(["sweep", "--config"])
            .arg(&cfg_path)
            .arg("--out")
            .arg(out)
            .env("OFFLOAD_SEED", seed)
            .status()
            .unwrap();
        assert!(status.success());
    };
    let out_1 = tmp("seeded_1.csv");
    let out_2 = tmp("seeded_2.csv");
    let out_1b = tmp("seeded_1b.csv");
    run("11", &out_1);
    run("22", &out_2);
    run("11", &out_1b);
    assert_eq!(fs::read(&out_1).unwrap(), fs::read(&out_1b).unwrap());
    assert_ne!(fs::read(&out_1).unwrap(), fs::read(&out_2).unwrap());
}

#[test]
fn latency_sweep_and_cases_and_curves() {
    let out_csv = tmp("latency.csv");
    let status = bin()
        .args(["sweep", "--config"])
        .arg(repo_config("latency_sweep.json"))
        .arg("--out")
        .arg(&out_csv)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(&out_csv).unwrap();
    assert!(csv.starts_with("l_max_s,"));
    assert!(csv.contains("Partial") || csv.contains("Total"));

    let out = bin()
        .args(["cases", "--config"])
        .arg(repo_config("solve_single.json"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(json["l_o"].as_f64().unwrap() > 0.0);

    for kind in ["energy-time", "energy-rate", "modes"] {
        let out_csv = tmp(&format!("curve_{kind}.csv"));
        let status = bin()
            .args(["curve", "--kind", kind, "--config"])
            .arg(repo_config("curves.json"))
            .arg("--out")
            .arg(&out_csv)
            .status()
            .unwrap();
        assert!(status.success(), "curve {kind} failed");
        let csv = fs::read_to_string(&out_csv).unwrap();
        assert!(csv.lines().count() > 2, "curve {kind} produced no rows");
    }
}
