//! Joint radio/computation allocation.
//!
//! The four-variable convex program (split, UL time, DL time, rate) collapses
//! to a one-dimensional convex objective `f_o(S_P1)` over the offloaded bit
//! count: the DL rate is pinned to its maximum, the UL rate for a given split
//! is the min-energy rate clamped into `[r_ul_min(S_P1), R_UL^max]`, and the
//! optimum split is found by nested intervals on the sign of `df_o/dS_P1`.

use serde::{Deserialize, Serialize};

use crate::channel::{effective_rank, max_rate_waterfill, min_power_waterfill, ChannelState};
use crate::energy::{
    e_ul_norm_deriv, e_ul_norm_or_limit, min_energy_rate, PowerModelParams,
};
use crate::{Error, Result};

/// Application profile: load, overheads, per-bit compute costs, time budget.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ApplicationProfile {
    /// Total bits to process.
    pub s_app: f64,
    /// UL overhead factor; `s_ul = beta_ul * s_p1`.
    pub beta_ul: f64,
    /// DL output/overhead ratio; `s_dl = beta_dl * s_p1`.
    pub beta_dl: f64,
    /// Local compute time per bit, s/bit.
    pub tau_p0: f64,
    /// Remote compute time per bit, s/bit.
    pub tau_p1: f64,
    /// Local compute energy per bit, J/bit.
    pub eps_p0: f64,
    /// Latency budget, s. Infinity means unconstrained.
    #[serde(default = "inf")]
    pub l_max: f64,
}

fn inf() -> f64 {
    f64::INFINITY
}

impl ApplicationProfile {
    pub fn validate(&self) -> Result<()> {
        if !(self.s_app >= 0.0) {
            return Err(Error::InvalidInput("s_app must be >= 0".into()));
        }
        if !(self.beta_ul >= 1.0) {
            return Err(Error::InvalidInput("beta_ul must be >= 1".into()));
        }
        for (name, v) in [
            ("beta_dl", self.beta_dl),
            ("tau_p0", self.tau_p0),
            ("tau_p1", self.tau_p1),
            ("eps_p0", self.eps_p0),
            ("l_max", self.l_max),
        ] {
            if !(v >= 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// How the optimal split classifies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    NoOffload,
    Partial,
    Total,
}

/// Full description of an optimal allocation.
#[derive(Clone, Debug, Serialize)]
pub struct OffloadSolution {
    /// Bits processed locally.
    pub s_p0: f64,
    /// Bits processed remotely.
    pub s_p1: f64,
    /// UL rate (diagnostic `r_ul_star(0)` when nothing is offloaded), bit/s.
    pub r_ul: f64,
    /// DL rate (its maximum whenever output bits flow), bit/s.
    pub r_dl: f64,
    pub t_ul: f64,
    pub t_dl: f64,
    pub energy_ul: f64,
    pub energy_dl: f64,
    pub energy_local: f64,
    pub energy_total: f64,
    /// max(local branch, offload branch) completion time, s.
    pub latency: f64,
    pub decision: Decision,
    pub r_ul_max: f64,
    pub r_dl_max: f64,
}

/// Nested-intervals solver settings. `epsilon` is the stop threshold as a
/// fraction of the initial search interval.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverConfig {
    pub epsilon: f64,
    pub max_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { epsilon: 1e-6, max_iters: 200 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidInput("epsilon must be in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Either an optimal allocation or the smallest latency budget that would
/// admit one.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SolveOutcome {
    Solved(OffloadSolution),
    Infeasible {
        /// Minimum affordable latency L_o, s.
        l_required: f64,
    },
}

/// Maximum supported UL rate: water-filling at the MT power cap, clipped by
/// the practical per-eigenmode spectral-efficiency cap.
pub fn r_ul_cap(ch: &ChannelState, pm: &PowerModelParams) -> f64 {
    if effective_rank(&ch.eigs_ul) == 0 {
        return 0.0;
    }
    let cap = pm.se_cap * ch.min_antennas() as f64 * ch.w_ul;
    max_rate_waterfill(&ch.eigs_ul, pm.p_tx_mt_max, ch.w_ul, f64::INFINITY)
        .map(|r| r.min(cap))
        .unwrap_or(0.0)
}

/// Maximum supported DL rate under the FAP power cap.
pub fn r_dl_cap(ch: &ChannelState, pm: &PowerModelParams) -> f64 {
    if effective_rank(&ch.eigs_dl) == 0 {
        return 0.0;
    }
    let cap = pm.se_cap * ch.min_antennas() as f64 * ch.w_dl;
    max_rate_waterfill(&ch.eigs_dl, pm.p_tx_fap_max, ch.w_dl, f64::INFINITY)
        .map(|r| r.min(cap))
        .unwrap_or(0.0)
}

/// Slowest UL rate that still fits the offload branch in the budget:
/// `β_UL s / (L_max − τ_P1 s − β_DL s / R_DL^max)`.
pub fn r_ul_min(s_p1: f64, prof: &ApplicationProfile, r_dl_max: f64) -> Result<f64> {
    if s_p1 == 0.0 {
        return Ok(0.0);
    }
    let dl_time = dl_time_per_bit(prof, r_dl_max) * s_p1;
    let denom = prof.l_max - prof.tau_p1 * s_p1 - dl_time;
    if !(denom > 0.0) {
        return Err(Error::InfeasibleSplit(format!(
            "offload branch alone exceeds the latency budget at s_p1 = {s_p1}"
        )));
    }
    Ok(prof.beta_ul * s_p1 / denom)
}

/// DL transmission seconds per offloaded bit; zero when no output returns.
fn dl_time_per_bit(prof: &ApplicationProfile, r_dl_max: f64) -> f64 {
    if prof.beta_dl == 0.0 {
        0.0
    } else {
        prof.beta_dl / r_dl_max
    }
}

/// Feasible interval `[S_P1^min, S_P1^max]`. Infeasible instances show up as
/// an inverted interval, not an error.
pub fn s_p1_bounds(
    prof: &ApplicationProfile,
    r_ul_max: f64,
    r_dl_max: f64,
) -> (f64, f64) {
    let s_min = if prof.l_max.is_infinite() || prof.tau_p0 == 0.0 {
        0.0
    } else {
        (prof.s_app - prof.l_max / prof.tau_p0).max(0.0)
    };
    let per_bit = prof.beta_ul / r_ul_max + prof.tau_p1 + dl_time_per_bit(prof, r_dl_max);
    let s_max = if per_bit == 0.0 {
        prof.s_app
    } else {
        (prof.l_max / per_bit).min(prof.s_app)
    };
    (s_min, s_max)
}

/// Precomputed per-instance quantities shared by the objective, its
/// derivative, and the solver.
struct Instance<'a> {
    prof: &'a ApplicationProfile,
    ch: &'a ChannelState,
    pm: &'a PowerModelParams,
    r_ul_max: f64,
    r_dl_max: f64,
    /// Min-energy UL rate Ř_UL.
    r_check: f64,
    /// `k_rx1 β_DL / R_DL^max + k_rx2 β_DL`, J per offloaded bit.
    dl_cost_per_bit: f64,
}

impl<'a> Instance<'a> {
    fn new(
        prof: &'a ApplicationProfile,
        ch: &'a ChannelState,
        pm: &'a PowerModelParams,
        r_dl_max: f64,
    ) -> Result<Self> {
        let r_ul_max = r_ul_cap(ch, pm);
        let r_check = if effective_rank(&ch.eigs_ul) == 0 {
            0.0
        } else {
            min_energy_rate(ch, pm)?
        };
        let dl_cost_per_bit = if prof.beta_dl == 0.0 {
            0.0
        } else {
            pm.k_rx1 * prof.beta_dl / r_dl_max + pm.k_rx2 * prof.beta_dl
        };
        Ok(Self { prof, ch, pm, r_ul_max, r_dl_max, r_check, dl_cost_per_bit })
    }

    fn r_star(&self, s_p1: f64) -> Result<f64> {
        let r_min = r_ul_min(s_p1, self.prof, self.r_dl_max)?;
        Ok(self.r_check.clamp(r_min, self.r_ul_max.max(r_min)))
    }

    fn f_o(&self, s_p1: f64) -> Result<f64> {
        let ul = if s_p1 == 0.0 {
            0.0
        } else {
            let r = self.r_star(s_p1)?;
            s_p1 * self.prof.beta_ul * e_ul_norm_or_limit(r, self.ch, self.pm)?
        };
        Ok(ul + (self.dl_cost_per_bit - self.prof.eps_p0) * s_p1
            + self.prof.eps_p0 * self.prof.s_app)
    }

    fn dfo(&self, s_p1: f64) -> Result<f64> {
        let r_min = r_ul_min(s_p1, self.prof, self.r_dl_max)?;
        let r = self.r_check.clamp(r_min, self.r_ul_max.max(r_min));
        let mut d = self.prof.beta_ul * e_ul_norm_or_limit(r, self.ch, self.pm)?
            + self.dl_cost_per_bit
            - self.prof.eps_p0;
        // Chain term is active only on the lower-clamp branch (r* = r_ul_min).
        if s_p1 > 0.0 && r_min > self.r_check {
            let denom = self.prof.l_max
                - s_p1 * self.prof.tau_p1
                - s_p1 * dl_time_per_bit(self.prof, self.r_dl_max);
            let dr_ds = self.prof.beta_ul * self.prof.l_max / (denom * denom);
            d += s_p1 * self.prof.beta_ul * e_ul_norm_deriv(r, self.ch, self.pm)? * dr_ds;
        }
        Ok(d)
    }
}

/// Optimal UL rate for a fixed split: Ř_UL clamped into
/// `[r_ul_min(S_P1), R_UL^max]`.
pub fn r_ul_star(
    s_p1: f64,
    prof: &ApplicationProfile,
    ch: &ChannelState,
    pm: &PowerModelParams,
    r_dl_max: f64,
) -> Result<f64> {
    Instance::new(prof, ch, pm, r_dl_max)?.r_star(s_p1)
}

/// One-dimensional objective: total MT energy as a function of the split.
pub fn f_o(
    s_p1: f64,
    prof: &ApplicationProfile,
    ch: &ChannelState,
    pm: &PowerModelParams,
    r_dl_max: f64,
) -> Result<f64> {
    Instance::new(prof, ch, pm, r_dl_max)?.f_o(s_p1)
}

/// Analytic derivative of [`f_o`], including the `dr*/dS_P1` chain term on
/// the lower-clamp branch.
pub fn dfo_dsp1(
    s_p1: f64,
    prof: &ApplicationProfile,
    ch: &ChannelState,
    pm: &PowerModelParams,
    r_dl_max: f64,
) -> Result<f64> {
    Instance::new(prof, ch, pm, r_dl_max)?.dfo(s_p1)
}

/// Minimum affordable latency and the split that achieves it, given the rate
/// caps. Degenerate (zero-rate) channels force the all-local path.
pub(crate) fn min_latency_given_rates(
    prof: &ApplicationProfile,
    r_ul_max: f64,
    r_dl_max: f64,
) -> (f64, (f64, f64), bool) {
    if r_ul_max == 0.0 || (prof.beta_dl > 0.0 && r_dl_max == 0.0) {
        return (prof.s_app * prof.tau_p0, (prof.s_app, 0.0), true);
    }
    let a = prof.beta_ul / r_ul_max + prof.tau_p1 + dl_time_per_bit(prof, r_dl_max);
    let total = a + prof.tau_p0;
    if total == 0.0 {
        return (0.0, (0.0, prof.s_app), false);
    }
    let l_o = prof.s_app * prof.tau_p0 * a / total;
    let s_p0 = prof.s_app * a / total;
    let s_p1 = prof.s_app * prof.tau_p0 / total;
    (l_o, (s_p0, s_p1), false)
}

/// Joint allocation solver.
///
/// Computes the feasible split interval, shortcuts boundary optima via the
/// derivative sign, otherwise halves nested intervals around the zero of
/// `df_o/dS_P1` until the interval is below `epsilon` times its initial
/// length, then reconstructs rates, times, and energies.
pub fn solve(
    prof: &ApplicationProfile,
    ch: &ChannelState,
    pm: &PowerModelParams,
    cfg: &SolverConfig,
) -> Result<SolveOutcome> {
    prof.validate()?;
    pm.validate()?;
    cfg.validate()?;

    let r_dl_max = r_dl_cap(ch, pm);
    let inst = Instance::new(prof, ch, pm, r_dl_max)?;
    let (s_min, s_max) = s_p1_bounds(prof, inst.r_ul_max, r_dl_max);
    if s_max < s_min - 1e-12 * prof.s_app.max(1.0) {
        let (l_required, _, _) = min_latency_given_rates(prof, inst.r_ul_max, r_dl_max);
        return Ok(SolveOutcome::Infeasible { l_required });
    }
    let s_max = s_max.max(s_min);

    let s_star = if s_max == s_min {
        s_min
    } else if inst.dfo(s_min)? >= 0.0 {
        s_min
    } else if inst.dfo(s_max)? <= 0.0 {
        s_max
    } else {
        let mut lo = s_min;
        let mut hi = s_max;
        let width0 = s_max - s_min;
        let mut mid = 0.5 * (lo + hi);
        for _ in 0..cfg.max_iters {
            if inst.dfo(mid)? <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            mid = 0.5 * (lo + hi);
            if hi - lo < cfg.epsilon * width0 {
                break;
            }
        }
        mid
    };

    build_solution(s_star, &inst, s_min, s_max)
}

fn build_solution(
    s_p1: f64,
    inst: &Instance,
    _s_min: f64,
    _s_max: f64,
) -> Result<SolveOutcome> {
    let prof = inst.prof;
    let pm = inst.pm;
    let r_ul = inst.r_star(s_p1)?;
    let s_p0 = (prof.s_app - s_p1).max(0.0);
    let s_ul = prof.beta_ul * s_p1;
    let s_dl = prof.beta_dl * s_p1;

    let (t_ul, energy_ul) = if s_p1 == 0.0 {
        (0.0, 0.0)
    } else if r_ul == 0.0 {
        // k_tx1 = 0, unconstrained latency: rate pushed to its lower limit.
        let e = s_ul * e_ul_norm_or_limit(0.0, inst.ch, pm)?;
        (f64::INFINITY, e)
    } else {
        let t = s_ul / r_ul;
        let wf = min_power_waterfill(&inst.ch.eigs_ul, r_ul, inst.ch.w_ul)?;
        (t, pm.k_tx1 * t + pm.k_tx2 * t * wf.total_power)
    };

    let t_dl = if s_dl == 0.0 { 0.0 } else { s_dl / inst.r_dl_max };
    let energy_dl = pm.k_rx1 * t_dl + pm.k_rx2 * s_dl;
    let energy_local = prof.eps_p0 * s_p0;
    let energy_total = energy_ul + energy_dl + energy_local;

    let offload_branch = if s_p1 == 0.0 { 0.0 } else { t_ul + prof.tau_p1 * s_p1 + t_dl };
    let latency = (prof.tau_p0 * s_p0).max(offload_branch);

    let band = 1e-9 * prof.s_app;
    let decision = if s_p1 < band || prof.s_app == 0.0 {
        Decision::NoOffload
    } else if s_p1 > prof.s_app - band {
        Decision::Total
    } else {
        Decision::Partial
    };

    Ok(SolveOutcome::Solved(OffloadSolution {
        s_p0,
        s_p1,
        r_ul,
        r_dl: if s_dl > 0.0 { inst.r_dl_max } else { 0.0 },
        t_ul,
        t_dl,
        energy_ul,
        energy_dl,
        energy_local,
        energy_total,
        latency,
        decision,
        r_ul_max: inst.r_ul_max,
        r_dl_max: inst.r_dl_max,
    }))
}
