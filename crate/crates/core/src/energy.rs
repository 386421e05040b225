//! MT power consumption models and the minimum-energy functions for UL
//! transmission and DL reception.
//!
//! UL consumption is `k_tx1 + k_tx2 * p_tx` (baseline plus a linear slope on
//! the radiated power), DL consumption is `k_rx1 + k_rx2 * r_dl`. The minimum
//! UL energy for `(t, s)` comes from water-filling the rate `s/t` over the
//! channel eigenmodes; normalized per bit it depends on the rate alone.

use serde::{Deserialize, Serialize};

use crate::channel::{effective_rank, min_power_waterfill, ChannelState, WaterFillResult};
use crate::{Error, Result};

const LN2: f64 = std::f64::consts::LN_2;

/// Consumption constants and radiated-power limits of the MT/FAP pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PowerModelParams {
    /// Baseline transmit-chain consumption, W.
    pub k_tx1: f64,
    /// Slope of consumption vs. radiated power, dimensionless.
    pub k_tx2: f64,
    /// Baseline receive-chain consumption, W.
    pub k_rx1: f64,
    /// Decode-rate slope, J/bit.
    pub k_rx2: f64,
    /// MT radiated-power cap, W.
    pub p_tx_mt_max: f64,
    /// FAP radiated-power cap, W.
    pub p_tx_fap_max: f64,
    /// Practical spectral-efficiency cap per eigenmode, bit/s/Hz.
    pub se_cap: f64,
}

impl PowerModelParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("k_tx1", self.k_tx1),
            ("k_tx2", self.k_tx2),
            ("k_rx1", self.k_rx1),
            ("k_rx2", self.k_rx2),
            ("p_tx_mt_max", self.p_tx_mt_max),
            ("p_tx_fap_max", self.p_tx_fap_max),
            ("se_cap", self.se_cap),
        ];
        for (name, v) in fields {
            if !(v >= 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(self.k_tx2 > 0.0) {
            return Err(Error::InvalidInput("k_tx2 must be positive".into()));
        }
        Ok(())
    }
}

/// Minimum UL energy for a concrete `(t, s)` pair plus the allocation behind it.
#[derive(Clone, Debug)]
pub struct UplinkEnergyPoint {
    pub t_ul: f64,
    pub s_ul: f64,
    /// `k_tx1 t + k_tx2 t Σ(c - 1/λ_i)`, J.
    pub energy: f64,
    pub waterfill: WaterFillResult,
}

/// Minimum energy the MT spends transmitting `s_ul` bits in `t_ul` seconds.
pub fn e_ul(
    t_ul: f64,
    s_ul: f64,
    ch: &ChannelState,
    pm: &PowerModelParams,
) -> Result<UplinkEnergyPoint> {
    if !(t_ul > 0.0) {
        return Err(Error::InvalidInput("t_ul must be positive".into()));
    }
    if !(s_ul >= 0.0) {
        return Err(Error::InvalidInput("s_ul must be non-negative".into()));
    }
    let waterfill = min_power_waterfill(&ch.eigs_ul, s_ul / t_ul, ch.w_ul)?;
    let energy = pm.k_tx1 * t_ul + pm.k_tx2 * t_ul * waterfill.total_power;
    Ok(UplinkEnergyPoint { t_ul, s_ul, energy, waterfill })
}

/// Minimum UL energy per transmitted bit at rate `r_ul`, J/bit.
pub fn e_ul_norm(r_ul: f64, ch: &ChannelState, pm: &PowerModelParams) -> Result<f64> {
    if !(r_ul > 0.0) {
        return Err(Error::InvalidInput("r_ul must be positive".into()));
    }
    let wf = min_power_waterfill(&ch.eigs_ul, r_ul, ch.w_ul)?;
    Ok((pm.k_tx1 + pm.k_tx2 * wf.total_power) / r_ul)
}

/// Like [`e_ul_norm`] but defined at rate 0 by its one-sided limit:
/// `k_tx2 ln2 / (w λ_1)` when `k_tx1 = 0`, infinite otherwise. Used where
/// the optimizer may clamp the rate to zero (unconstrained, k_tx1 = 0 case).
pub(crate) fn e_ul_norm_or_limit(r_ul: f64, ch: &ChannelState, pm: &PowerModelParams) -> Result<f64> {
    if r_ul > 0.0 {
        return e_ul_norm(r_ul, ch, pm);
    }
    if effective_rank(&ch.eigs_ul) == 0 {
        return Err(Error::NoChannel);
    }
    if pm.k_tx1 > 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(pm.k_tx2 * LN2 / (ch.w_ul * ch.eigs_ul[0]))
    }
}

/// Derivative of the normalized UL energy w.r.t. the rate, J*s/bit².
///
/// `ē'(r) = -k_tx1/r² - k_tx2 P(r)/r² + k_tx2 ln2 c(r) / (w r)` with P and c
/// from the water-filling at rate r. At mode-activation kinks this is the
/// right-hand branch value.
pub fn e_ul_norm_deriv(r_ul: f64, ch: &ChannelState, pm: &PowerModelParams) -> Result<f64> {
    if !(r_ul > 0.0) {
        return Err(Error::InvalidInput("r_ul must be positive".into()));
    }
    let wf = min_power_waterfill(&ch.eigs_ul, r_ul, ch.w_ul)?;
    Ok(-pm.k_tx1 / (r_ul * r_ul) - pm.k_tx2 * wf.total_power / (r_ul * r_ul)
        + pm.k_tx2 * LN2 * wf.water_level / (ch.w_ul * r_ul))
}

/// Rate Ř_UL minimizing the normalized UL energy.
///
/// Returns 0 when ē_UL is non-decreasing everywhere (k_tx1 = 0). When the
/// derivative stays negative up to the practical cap `se_cap * rank * w`
/// the cap is returned (the Ř → ∞ case, clamped). Otherwise the unique
/// root of ē'_UL is found by doubling then bisection to 1e-9 relative.
pub fn min_energy_rate(ch: &ChannelState, pm: &PowerModelParams) -> Result<f64> {
    let rank = effective_rank(&ch.eigs_ul);
    if rank == 0 {
        return Err(Error::NoChannel);
    }
    if pm.k_tx1 == 0.0 {
        return Ok(0.0);
    }
    let rate_cap = pm.se_cap * rank as f64 * ch.w_ul;
    if e_ul_norm_deriv(rate_cap, ch, pm)? <= 0.0 {
        return Ok(rate_cap);
    }
    let mut lo = rate_cap * 1e-12;
    let mut hi = rate_cap * 1e-9;
    while e_ul_norm_deriv(hi, ch, pm)? <= 0.0 {
        lo = hi;
        hi = (hi * 2.0).min(rate_cap);
    }
    while hi - lo > 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        if e_ul_norm_deriv(mid, ch, pm)? <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// MT energy spent receiving for `t_dl` seconds at `s_dl` bits, J.
pub fn e_dl(t_dl: f64, s_dl: f64, pm: &PowerModelParams) -> Result<f64> {
    if !(t_dl >= 0.0) || !(s_dl >= 0.0) {
        return Err(Error::InvalidInput("t_dl and s_dl must be non-negative".into()));
    }
    Ok(pm.k_rx1 * t_dl + pm.k_rx2 * s_dl)
}

/// DL energy per received bit at rate `r_dl`: `k_rx1/r_dl + k_rx2`, J/bit.
pub fn e_dl_norm(r_dl: f64, pm: &PowerModelParams) -> Result<f64> {
    if !(r_dl > 0.0) {
        return Err(Error::InvalidInput("r_dl must be positive".into()));
    }
    Ok(pm.k_rx1 / r_dl + pm.k_rx2)
}
