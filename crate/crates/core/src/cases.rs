//! Closed-form special cases: when no/total offloading is optimal, the
//! minimum affordable latency and its bit split, and the unconstrained-budget
//! all-or-nothing decision.

use serde::{Deserialize, Serialize};

use crate::channel::{effective_rank, ChannelState};
use crate::energy::{e_ul_norm_or_limit, min_energy_rate, PowerModelParams};
use crate::optimizer::{
    dfo_dsp1, min_latency_given_rates, r_dl_cap, r_ul_cap, r_ul_star, ApplicationProfile,
};
use crate::Result;

/// Unconstrained-latency decision: with no budget, partial offloading is
/// never optimal, so everything runs on one side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnconstrainedDecision {
    AllLocal,
    AllRemote,
}

/// Minimum affordable latency and the split that achieves it.
#[derive(Clone, Debug, Serialize)]
pub struct MinLatency {
    /// Smallest feasible budget L_o, s.
    pub l_o: f64,
    /// (local bits, offloaded bits) at the collapse point.
    pub split: (f64, f64),
    /// True when a zero-rate link forces the all-local path.
    pub degenerate: bool,
}

/// Bundle of all special-case analyses for one instance.
#[derive(Clone, Debug, Serialize)]
pub struct CaseReport {
    pub no_offload_optimal: bool,
    pub total_offload_optimal: bool,
    pub l_o: f64,
    pub split_at_lo: (f64, f64),
    pub degenerate: bool,
    pub unconstrained_decision: UnconstrainedDecision,
    /// Per-bit offload cost compared against eps_p0, J/bit.
    pub unconstrained_threshold: f64,
}

/// True iff processing every bit locally is both feasible and optimal:
/// the budget covers local-only execution and the per-bit offload cost at
/// `r_ul_star(0)` is at least `eps_p0`.
pub fn no_offload_optimal(
    prof: &ApplicationProfile,
    ch: &ChannelState,
    pm: &PowerModelParams,
) -> Result<bool> {
    if prof.l_max < prof.s_app * prof.tau_p0 {
        return Ok(false);
    }
    if effective_rank(&ch.eigs_ul) == 0 {
        return Ok(true);
    }
    let r_dl_max = r_dl_cap(ch, pm);
    if prof.beta_dl > 0.0 && r_dl_max == 0.0 {
        return Ok(true);
    }
    // df_o(0)/dS_P1 >= 0, chain term omitted at S_P1 = 0.
    let r0 = r_ul_star(0.0, prof, ch, pm, r_dl_max)?;
    let dl_cost = if prof.beta_dl == 0.0 {
        0.0
    } else {
        pm.k_rx1 * prof.beta_dl / r_dl_max + pm.k_rx2 * prof.beta_dl
    };
    let marginal = prof.beta_ul * e_ul_norm_or_limit(r0, ch, pm)? + dl_cost;
    Ok(prof.eps_p0 <= marginal)
}

/// True iff processing every bit remotely is both feasible (the offload path
/// alone fits the budget) and optimal (`df_o/dS_P1 ≤ 0` at `S_P1 = S_app`).
pub fn total_offload_optimal(
    prof: &ApplicationProfile,
    ch: &ChannelState,
    pm: &PowerModelParams,
) -> Result<bool> {
    let r_ul_max = r_ul_cap(ch, pm);
    if r_ul_max == 0.0 && prof.s_app > 0.0 {
        return Ok(false);
    }
    let r_dl_max = r_dl_cap(ch, pm);
    if prof.beta_dl > 0.0 && r_dl_max == 0.0 && prof.s_app > 0.0 {
        return Ok(false);
    }
    let dl_per_bit = if prof.beta_dl == 0.0 { 0.0 } else { prof.beta_dl / r_dl_max };
    let a = prof.beta_ul / r_ul_max + prof.tau_p1 + dl_per_bit;
    if prof.l_max < prof.s_app * a {
        return Ok(false);
    }
    if prof.s_app == 0.0 {
        return Ok(true);
    }
    Ok(dfo_dsp1(prof.s_app, prof, ch, pm, r_dl_max)? <= 0.0)
}

/// Minimum affordable latency `L_o = S_app τ_P0 A / (A + τ_P0)` with
/// `A = β_UL/R_UL^max + τ_P1 + β_DL/R_DL^max`, and the unique split that
/// attains it.
pub fn min_latency(
    prof: &ApplicationProfile,
    ch: &ChannelState,
    pm: &PowerModelParams,
) -> MinLatency {
    let (l_o, split, degenerate) =
        min_latency_given_rates(prof, r_ul_cap(ch, pm), r_dl_cap(ch, pm));
    MinLatency { l_o, split, degenerate }
}

/// With no latency budget the optimal UL rate is
/// `min(Ř_UL, R_UL^max)` regardless of the split, so the objective is linear
/// in `S_P1` and the decision reduces to a per-bit threshold against
/// `eps_p0`. Ties resolve to all-local.
pub fn unconstrained_decision(
    prof: &ApplicationProfile,
    ch: &ChannelState,
    pm: &PowerModelParams,
) -> Result<(UnconstrainedDecision, f64)> {
    if effective_rank(&ch.eigs_ul) == 0 {
        return Ok((UnconstrainedDecision::AllLocal, f64::INFINITY));
    }
    let r_dl_max = r_dl_cap(ch, pm);
    if prof.beta_dl > 0.0 && r_dl_max == 0.0 {
        return Ok((UnconstrainedDecision::AllLocal, f64::INFINITY));
    }
    let r_star = min_energy_rate(ch, pm)?.min(r_ul_cap(ch, pm));
    let dl_cost = if prof.beta_dl == 0.0 {
        0.0
    } else {
        pm.k_rx1 * prof.beta_dl / r_dl_max + pm.k_rx2 * prof.beta_dl
    };
    let threshold = prof.beta_ul * e_ul_norm_or_limit(r_star, ch, pm)? + dl_cost;
    let decision = if threshold >= prof.eps_p0 {
        UnconstrainedDecision::AllLocal
    } else {
        UnconstrainedDecision::AllRemote
    };
    Ok((decision, threshold))
}

/// Run all special-case analyses for one instance.
pub fn case_report(
    prof: &ApplicationProfile,
    ch: &ChannelState,
    pm: &PowerModelParams,
) -> Result<CaseReport> {
    let ml = min_latency(prof, ch, pm);
    let (unconstrained, threshold) = unconstrained_decision(prof, ch, pm)?;
    Ok(CaseReport {
        no_offload_optimal: no_offload_optimal(prof, ch, pm)?,
        total_offload_optimal: total_offload_optimal(prof, ch, pm)?,
        l_o: ml.l_o,
        split_at_lo: ml.split,
        degenerate: ml.degenerate,
        unconstrained_decision: unconstrained,
        unconstrained_threshold: threshold,
    })
}
