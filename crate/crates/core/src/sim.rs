//! Scenario configuration, seeded Rayleigh channel generation, Monte Carlo
//! sweeps, and CSV emission.
//!
//! Reproducibility contract: every channel draw comes from a ChaCha12 stream
//! whose 256-bit key is derived with splitmix64 from (seed, antenna index,
//! gain index, channel index, direction flag). Gaussians are produced by the
//! Box–Muller transform of two 53-bit uniforms, the first mapped to (0, 1]
//! and the second to [0, 1). Identical configs therefore give byte-identical
//! output regardless of evaluation order.

use std::f64::consts::TAU;

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::channel::{min_power_waterfill, CMatrix, ChannelState};
use crate::energy::{e_ul, e_ul_norm, PowerModelParams};
use crate::optimizer::{
    solve, ApplicationProfile, SolveOutcome, SolverConfig,
};
use crate::{Error, Result};

/// Which table a scenario produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    GainSweep,
    LatencySweep,
    EnergyCurve,
    RateCurve,
}

/// Full description of a Monte Carlo experiment or curve table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub sweep: SweepKind,
    pub profile: ApplicationProfile,
    pub power_model: PowerModelParams,
    /// (n_mt, n_fap) pairs.
    #[serde(default = "default_antennas")]
    pub antennas: Vec<(usize, usize)>,
    /// Mean channel gains, dB; applied as 10^(dB/10) mean per-entry power.
    #[serde(default = "default_gammas")]
    pub gamma_db_range: Vec<f64>,
    #[serde(default = "default_n_channels")]
    pub n_channels: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_w")]
    pub w_ul: f64,
    #[serde(default = "default_w")]
    pub w_dl: f64,
    /// Latency budgets for the latency sweep, s.
    #[serde(default = "default_l_max_grid")]
    pub l_max_grid: Vec<f64>,
    /// Fixed gain for the latency sweep and curve tables, dB.
    #[serde(default = "default_curve_gamma")]
    pub gamma_db: f64,
    /// UL block sizes for the energy-time curve, bits.
    #[serde(default = "default_s_ul_list")]
    pub s_ul_list: Vec<f64>,
    /// Transmission times for the energy-time curve, s.
    #[serde(default = "default_t_grid")]
    pub t_grid: Vec<f64>,
    /// UL rates for the rate curve, b/s/Hz.
    #[serde(default = "default_r_grid")]
    pub r_per_w_grid: Vec<f64>,
    #[serde(default)]
    pub solver: Option<SolverConfig>,
}

fn default_antennas() -> Vec<(usize, usize)> {
    vec![(4, 4), (4, 2), (4, 1), (1, 1)]
}
fn default_gammas() -> Vec<f64> {
    (-4..=8).map(|i| 5.0 * i as f64).collect()
}
fn default_n_channels() -> usize {
    200
}
fn default_w() -> f64 {
    10e6
}
fn default_l_max_grid() -> Vec<f64> {
    (1..=40).map(|i| 0.25 * i as f64).collect()
}
fn default_curve_gamma() -> f64 {
    25.0
}
fn default_s_ul_list() -> Vec<f64> {
    vec![1.2e7, 6e6]
}
fn default_t_grid() -> Vec<f64> {
    (1..=100).map(|i| 0.05 * i as f64).collect()
}
fn default_r_grid() -> Vec<f64> {
    (1..=110).map(|i| 0.05 * i as f64).collect()
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.profile.validate()?;
        self.power_model.validate()?;
        if self.n_channels == 0 {
            return Err(Error::InvalidInput("n_channels must be >= 1".into()));
        }
        if self.antennas.is_empty() {
            return Err(Error::InvalidInput("antennas must be non-empty".into()));
        }
        if self.antennas.iter().any(|&(m, f)| m == 0 || f == 0) {
            return Err(Error::InvalidInput("antenna counts must be >= 1".into()));
        }
        if self.gamma_db_range.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidInput("gamma_db_range must be finite".into()));
        }
        if !(self.w_ul > 0.0 && self.w_dl > 0.0) {
            return Err(Error::InvalidInput("bandwidths must be > 0".into()));
        }
        Ok(())
    }

    pub fn solver(&self) -> SolverConfig {
        self.solver.clone().unwrap_or_default()
    }
}

/// One averaged point of a gain sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub config_id: usize,
    pub gamma_db: f64,
    pub n_mt: usize,
    pub n_fap: usize,
    /// 100·(1 − mean energy / (eps_p0·s_app)).
    pub energy_saving_pct: f64,
    pub mean_latency_s: f64,
    pub offloaded_pct: f64,
    /// Mean optimal UL spectral efficiency, b/s/Hz.
    pub mean_r_ul_bphz: f64,
    /// Mean UL rate cap, b/s/Hz.
    pub r_ul_max_bphz: f64,
    pub n_infeasible: usize,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str = "config_id,gamma_db,n_mt,n_fap,energy_saving_pct,mean_latency_s,offloaded_pct,mean_r_ul_bphz,r_ul_max_bphz,n_infeasible";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{:.11e},{},{},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{}",
            self.config_id,
            self.gamma_db,
            self.n_mt,
            self.n_fap,
            self.energy_saving_pct,
            self.mean_latency_s,
            self.offloaded_pct,
            self.mean_r_ul_bphz,
            self.r_ul_max_bphz,
            self.n_infeasible
        )
    }
}

/// One point of a latency sweep on a single fixed channel.
#[derive(Clone, Debug, Serialize)]
pub struct LatencyRow {
    pub l_max_s: f64,
    pub feasible: bool,
    /// Minimum affordable latency when infeasible, else 0.
    pub l_required_s: f64,
    pub offloaded_pct: f64,
    pub energy_saving_pct: f64,
    pub latency_s: f64,
    pub decision: String,
}

impl LatencyRow {
    pub const CSV_HEADER: &'static str =
        "l_max_s,feasible,l_required_s,offloaded_pct,energy_saving_pct,latency_s,decision";

    pub fn to_csv(&self) -> String {
        format!(
            "{:.11e},{},{:.11e},{:.11e},{:.11e},{:.11e},{}",
            self.l_max_s,
            self.feasible,
            self.l_required_s,
            self.offloaded_pct,
            self.energy_saving_pct,
            self.latency_s,
            self.decision
        )
    }
}

/// One point of the UL energy-vs-time curve.
#[derive(Clone, Debug, Serialize)]
pub struct EnergyCurveRow {
    pub s_ul_bits: f64,
    pub t_ul_s: f64,
    pub e_ul_j: f64,
}

impl EnergyCurveRow {
    pub const CSV_HEADER: &'static str = "s_ul_bits,t_ul_s,e_ul_j";

    pub fn to_csv(&self) -> String {
        format!("{:.11e},{:.11e},{:.11e}", self.s_ul_bits, self.t_ul_s, self.e_ul_j)
    }
}

/// One point of the normalized-energy / active-modes curve.
#[derive(Clone, Debug, Serialize)]
pub struct RateCurveRow {
    pub r_ul_bphz: f64,
    pub e_norm_j_per_bit: f64,
    pub k_active: usize,
}

impl RateCurveRow {
    pub const CSV_HEADER: &'static str = "r_ul_bphz,e_norm_j_per_bit,k_active";

    pub fn to_csv(&self) -> String {
        format!("{:.11e},{:.11e},{}", self.r_ul_bphz, self.e_norm_j_per_bit, self.k_active)
    }
}

pub fn rows_to_csv<R>(header: &str, rows: &[R], to_csv: impl Fn(&R) -> String) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(header);
    out.push('\n');
    for r in rows {
        out.push_str(&to_csv(r));
        out.push('\n');
    }
    out
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

/// Deterministic per-point substream: the ChaCha12 key is a splitmix64 chain
/// over the master seed and the point coordinates.
pub fn substream_rng(
    seed: u64,
    antenna_idx: u64,
    gamma_idx: u64,
    channel_idx: u64,
    downlink: bool,
) -> ChaCha12Rng {
    let mut z = splitmix64(seed);
    for v in [antenna_idx, gamma_idx, channel_idx, downlink as u64] {
        z = splitmix64(z ^ splitmix64(v.wrapping_add(0xA0761D6478BD642F)));
    }
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        z = splitmix64(z);
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

/// Box–Muller pair from two 53-bit uniforms: u1 in (0, 1], u2 in [0, 1).
fn gaussian_pair(rng: &mut ChaCha12Rng) -> (f64, f64) {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * SCALE;
    let u2 = (rng.next_u64() >> 11) as f64 * SCALE;
    let radius = (-2.0 * u1.ln()).sqrt();
    let theta = TAU * u2;
    (radius * theta.cos(), radius * theta.sin())
}

/// i.i.d. zero-mean circularly symmetric complex Gaussian entries with mean
/// per-entry power gain `gamma_linear`.
pub fn gen_channel(
    n_rows: usize,
    n_cols: usize,
    gamma_linear: f64,
    rng: &mut ChaCha12Rng,
) -> CMatrix {
    let amp = (gamma_linear / 2.0).sqrt();
    let mut data = Vec::with_capacity(n_rows * n_cols);
    for _ in 0..n_rows * n_cols {
        let (re, im) = gaussian_pair(rng);
        data.push(num_complex::Complex64::new(amp * re, amp * im));
    }
    CMatrix::new(n_rows, n_cols, data).expect("dimensions validated by caller")
}

fn draw_channel_state(
    cfg: &ScenarioConfig,
    antenna_idx: usize,
    gamma_idx: usize,
    channel_idx: usize,
    gamma_linear: f64,
) -> Result<ChannelState> {
    let (n_mt, n_fap) = cfg.antennas[antenna_idx];
    let mut rng_ul =
        substream_rng(cfg.seed, antenna_idx as u64, gamma_idx as u64, channel_idx as u64, false);
    let mut rng_dl =
        substream_rng(cfg.seed, antenna_idx as u64, gamma_idx as u64, channel_idx as u64, true);
    let h_ul = gen_channel(n_fap, n_mt, gamma_linear, &mut rng_ul);
    let h_dl = gen_channel(n_mt, n_fap, gamma_linear, &mut rng_dl);
    ChannelState::new(h_ul, h_dl, cfg.w_ul, cfg.w_dl)
}

fn saving_pct(energy_total: f64, prof: &ApplicationProfile) -> f64 {
    let baseline = prof.eps_p0 * prof.s_app;
    if baseline == 0.0 {
        0.0
    } else {
        (100.0 * (1.0 - energy_total / baseline)).max(0.0)
    }
}

/// Monte Carlo sweep over (antenna config, mean gain): `n_channels`
/// independent UL/DL draws per point, solved and averaged.
pub fn run_gain_sweep(cfg: &ScenarioConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let solver = cfg.solver();
    let mut rows = Vec::new();
    for (ai, &(n_mt, n_fap)) in cfg.antennas.iter().enumerate() {
        for (gi, &gamma_db) in cfg.gamma_db_range.iter().enumerate() {
            let gamma_linear = 10f64.powf(gamma_db / 10.0);
            let mut saving = 0.0;
            let mut latency = 0.0;
            let mut offloaded = 0.0;
            let mut r_ul = 0.0;
            let mut r_ul_max = 0.0;
            let mut n_infeasible = 0usize;
            let mut n_solved = 0usize;
            for ci in 0..cfg.n_channels {
                let ch = draw_channel_state(cfg, ai, gi, ci, gamma_linear)?;
                match solve(&cfg.profile, &ch, &cfg.power_model, &solver)? {
                    SolveOutcome::Solved(sol) => {
                        n_solved += 1;
                        saving += saving_pct(sol.energy_total, &cfg.profile);
                        latency += sol.latency;
                        offloaded += 100.0 * sol.s_p1 / cfg.profile.s_app.max(f64::MIN_POSITIVE);
                        r_ul += sol.r_ul / cfg.w_ul;
                        r_ul_max += sol.r_ul_max / cfg.w_ul;
                    }
                    SolveOutcome::Infeasible { .. } => n_infeasible += 1,
                }
            }
            let n = n_solved.max(1) as f64;
            rows.push(SweepRow {
                config_id: ai,
                gamma_db,
                n_mt,
                n_fap,
                energy_saving_pct: saving / n,
                mean_latency_s: latency / n,
                offloaded_pct: offloaded / n,
                mean_r_ul_bphz: r_ul / n,
                r_ul_max_bphz: r_ul_max / n,
                n_infeasible,
            });
        }
    }
    Ok(rows)
}

/// Latency-budget sweep on one seeded channel (first antenna pair,
/// `gamma_db` mean gain).
pub fn run_latency_sweep(cfg: &ScenarioConfig) -> Result<Vec<LatencyRow>> {
    cfg.validate()?;
    let solver = cfg.solver();
    let gamma_linear = 10f64.powf(cfg.gamma_db / 10.0);
    let ch = draw_channel_state(cfg, 0, 0, 0, gamma_linear)?;
    let mut rows = Vec::new();
    for &l_max in &cfg.l_max_grid {
        let prof = ApplicationProfile { l_max, ..cfg.profile.clone() };
        match solve(&prof, &ch, &cfg.power_model, &solver)? {
            SolveOutcome::Solved(sol) => rows.push(LatencyRow {
                l_max_s: l_max,
                feasible: true,
                l_required_s: 0.0,
                offloaded_pct: 100.0 * sol.s_p1 / prof.s_app.max(f64::MIN_POSITIVE),
                energy_saving_pct: saving_pct(sol.energy_total, &prof),
                latency_s: sol.latency,
                decision: format!("{:?}", sol.decision),
            }),
            SolveOutcome::Infeasible { l_required } => rows.push(LatencyRow {
                l_max_s: l_max,
                feasible: false,
                l_required_s: l_required,
                offloaded_pct: 0.0,
                energy_saving_pct: 0.0,
                latency_s: 0.0,
                decision: "Infeasible".into(),
            }),
        }
    }
    Ok(rows)
}

/// UL energy vs transmission time, one series per block size.
pub fn emit_energy_curve(
    ch: &ChannelState,
    pm: &PowerModelParams,
    s_ul_list: &[f64],
    t_grid: &[f64],
) -> Result<Vec<EnergyCurveRow>> {
    let mut rows = Vec::with_capacity(s_ul_list.len() * t_grid.len());
    for &s_ul in s_ul_list {
        for &t in t_grid {
            let point = e_ul(t, s_ul, ch, pm)?;
            rows.push(EnergyCurveRow { s_ul_bits: s_ul, t_ul_s: t, e_ul_j: point.energy });
        }
    }
    Ok(rows)
}

/// Normalized UL energy and active-mode count vs spectral efficiency.
pub fn emit_rate_curve(
    ch: &ChannelState,
    pm: &PowerModelParams,
    r_per_w_grid: &[f64],
) -> Result<Vec<RateCurveRow>> {
    let mut rows = Vec::with_capacity(r_per_w_grid.len());
    for &r_per_w in r_per_w_grid {
        let rate = r_per_w * ch.w_ul;
        let wf = min_power_waterfill(&ch.eigs_ul, rate, ch.w_ul)?;
        let e_norm = if rate > 0.0 { e_ul_norm(rate, ch, pm)? } else { f64::INFINITY };
        rows.push(RateCurveRow { r_ul_bphz: r_per_w, e_norm_j_per_bit: e_norm, k_active: wf.k_active });
    }
    Ok(rows)
}

/// Build the single fixed channel used by curve tables and the latency
/// sweep, so the CLI and tests agree on the realization.
pub fn curve_channel(cfg: &ScenarioConfig) -> Result<ChannelState> {
    cfg.validate()?;
    let gamma_linear = 10f64.powf(cfg.gamma_db / 10.0);
    draw_channel_state(cfg, 0, 0, 0, gamma_linear)
}
