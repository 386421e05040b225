//! `offload` — energy-optimal MT→FAP offloading solver and sweep runner.
//!
//! Exit codes: 0 success, 1 validation/config error, 2 infeasible solve.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use offload_core::cases::case_report;
use offload_core::channel::{CMatrix, ChannelState};
use offload_core::optimizer::{solve, SolveOutcome};
use offload_core::sim::{
    curve_channel, emit_energy_curve, emit_rate_curve, rows_to_csv, run_gain_sweep,
    run_latency_sweep, EnergyCurveRow, LatencyRow, RateCurveRow, ScenarioConfig, SweepKind,
    SweepRow,
};

#[derive(Parser)]
#[command(name = "offload", version, about = "Energy-optimal application offloading over MIMO links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a single instance and print the allocation as JSON.
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the sweep described by the config (gain or latency) and write CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the closed-form special-case report as JSON.
    Cases {
        #[arg(long)]
        config: PathBuf,
    },
    /// Emit a curve table (UL energy vs time, normalized energy / active modes vs rate).
    Curve {
        #[arg(long, value_enum)]
        kind: CurveKind,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CurveKind {
    /// e_UL(t) per block size.
    EnergyTime,
    /// Normalized energy per bit vs spectral efficiency.
    EnergyRate,
    /// Active eigenmode count vs spectral efficiency.
    Modes,
}

/// Optional explicit channel in the config file; matrices as row-major
/// arrays of [re, im] pairs. When absent the channel is drawn from the
/// seeded substream at `gamma_db`.
#[derive(Deserialize)]
struct ChannelOverride {
    h_ul: CMatrix,
    h_dl: CMatrix,
}

#[derive(Deserialize)]
struct ConfigExtras {
    channel: Option<ChannelOverride>,
}

fn load_config(path: &PathBuf) -> Result<(ScenarioConfig, Option<ChannelOverride>), String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let cfg: ScenarioConfig =
        serde_json::from_str(&text).map_err(|e| format!("config parse error: {e}"))?;
    let extras: ConfigExtras =
        serde_json::from_str(&text).map_err(|e| format!("config parse error: {e}"))?;
    let mut cfg = cfg;
    if let Ok(seed) = std::env::var("OFFLOAD_SEED") {
        cfg.seed = seed
            .parse()
            .map_err(|e| format!("OFFLOAD_SEED must be a 64-bit integer: {e}"))?;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok((cfg, extras.channel))
}

fn instance_channel(
    cfg: &ScenarioConfig,
    over: Option<ChannelOverride>,
) -> Result<ChannelState, String> {
    match over {
        Some(c) => ChannelState::new(c.h_ul, c.h_dl, cfg.w_ul, cfg.w_dl).map_err(|e| e.to_string()),
        None => curve_channel(cfg).map_err(|e| e.to_string()),
    }
}

fn run() -> Result<ExitCode, String> {
    match Cli::parse().command {
        Command::Solve { config } => {
            let (cfg, over) = load_config(&config)?;
            let ch = instance_channel(&cfg, over)?;
            let outcome = solve(&cfg.profile, &ch, &cfg.power_model, &cfg.solver())
                .map_err(|e| e.to_string())?;
            println!("{}", serde_json::to_string_pretty(&outcome).map_err(|e| e.to_string())?);
            Ok(match outcome {
                SolveOutcome::Solved(_) => ExitCode::SUCCESS,
                SolveOutcome::Infeasible { .. } => ExitCode::from(2),
            })
        }
        Command::Sweep { config, out } => {
            let (cfg, _) = load_config(&config)?;
            let csv = match cfg.sweep {
                SweepKind::GainSweep => {
                    let rows = run_gain_sweep(&cfg).map_err(|e| e.to_string())?;
                    rows_to_csv(SweepRow::CSV_HEADER, &rows, SweepRow::to_csv)
                }
                SweepKind::LatencySweep => {
                    let rows = run_latency_sweep(&cfg).map_err(|e| e.to_string())?;
                    rows_to_csv(LatencyRow::CSV_HEADER, &rows, LatencyRow::to_csv)
                }
                other => {
                    return Err(format!(
                        "config sweep kind {other:?} is a curve; use the `curve` subcommand"
                    ))
                }
            };
            fs::write(&out, csv).map_err(|e| format!("cannot write {}: {e}", out.display()))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Cases { config } => {
            let (cfg, over) = load_config(&config)?;
            let ch = instance_channel(&cfg, over)?;
            let report =
                case_report(&cfg.profile, &ch, &cfg.power_model).map_err(|e| e.to_string())?;
            println!("{}", serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Curve { kind, config, out } => {
            let (cfg, over) = load_config(&config)?;
            let ch = instance_channel(&cfg, over)?;
            let csv = match kind {
                CurveKind::EnergyTime => {
                    let rows = emit_energy_curve(&ch, &cfg.power_model, &cfg.s_ul_list, &cfg.t_grid)
                        .map_err(|e| e.to_string())?;
                    rows_to_csv(EnergyCurveRow::CSV_HEADER, &rows, EnergyCurveRow::to_csv)
                }
                CurveKind::EnergyRate | CurveKind::Modes => {
                    let rows = emit_rate_curve(&ch, &cfg.power_model, &cfg.r_per_w_grid)
                        .map_err(|e| e.to_string())?;
                    rows_to_csv(RateCurveRow::CSV_HEADER, &rows, RateCurveRow::to_csv)
                }
            };
            fs::write(&out, csv).map_err(|e| format!("cannot write {}: {e}", out.display()))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
