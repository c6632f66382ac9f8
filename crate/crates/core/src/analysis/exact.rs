//! Exact error probabilities of the threshold decoders.
//!
//! A decision statistic is the mean of `N` i.i.d. exponentials of mean
//! `sigma^2`, so `N S / sigma^2` is Erlang(N) and its tails are regularized
//! incomplete gamma functions. Tones are independent, which makes every
//! decoding stage a product of per-tone probabilities.

use serde::{Deserialize, Serialize};

use super::special;
use crate::binning::CodebookParams;
use crate::channel::{Link, SystemParams};
use crate::error::{Error, Result};
use crate::scheme::Thresholds;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactTails {
    /// `Pr{S < A}`.
    pub below: f64,
    /// `Pr{S >= A}`.
    pub above: f64,
    /// `ln Pr{S >= A}`, finite where `above` underflows.
    pub ln_above: f64,
}

/// Tails of the mean of `n` i.i.d. exponentials with mean `sigma_sq`
/// around `threshold`.
pub fn exact_tails(n: u32, threshold: f64, sigma_sq: f64) -> Result<ExactTails> {
    if n == 0 {
        return Err(Error::domain("exact_tails needs N >= 1"));
    }
    if !(threshold > 0.0) || !(sigma_sq > 0.0) {
        return Err(Error::domain(format!(
            "exact_tails needs A > 0 and sigma^2 > 0, got A={threshold}, sigma^2={sigma_sq}"
        )));
    }
    let a = n as f64;
    let x = a * threshold / sigma_sq;
    let ln_below = special::ln_gamma_p(a, x)?;
    let ln_above = special::ln_gamma_q(a, x)?;
    Ok(ExactTails { below: ln_below.exp(), above: ln_above.exp(), ln_above })
}

/// Exact per-stage and end-to-end error probabilities.
///
/// `p_e11` is unconditional; `p_e12` is conditioned on a correct relay and
/// `p_e2` on a correct destination bin. The `p_tag_*` fields split the block
/// error probability by first failing stage and sum to `p_e_total`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactErrorReport {
    pub p_miss_relay: f64,
    pub p_fa_relay: f64,
    pub p_e11: f64,
    pub p_miss_dest_r: f64,
    pub p_fa_dest_r: f64,
    pub p_e12: f64,
    pub p_miss_dest_s: f64,
    pub p_fa_dest_s: f64,
    pub p_e2: f64,
    pub p_bin_error: f64,
    pub p_e_total: f64,
    pub p_tag_e11: f64,
    pub p_tag_e12: f64,
    pub p_tag_e2: f64,
}

/// `(1 - p)^k` without forming `1 - p`.
fn pow_complement(p: f64, k: u64) -> f64 {
    if k == 0 {
        1.0
    } else {
        (k as f64 * (-p).ln_1p()).exp()
    }
}

/// `1 - (1 - p)^k`.
fn any_of(p: f64, k: u64) -> f64 {
    if k == 0 {
        0.0
    } else {
        -(k as f64 * (-p).ln_1p()).exp_m1()
    }
}

/// Exact error probabilities of one trial.
///
/// A relay that declares an error stays silent, so the destination then sees
/// noise on all `M_R` relay tones; a relay that decodes a wrong bin sends that
/// bin's tone.
pub fn exact_end_to_end(params: &SystemParams, cb: &CodebookParams, t: &Thresholds) -> Result<ExactErrorReport> {
    params.validate()?;
    cb.validate()?;
    let n = params.n;
    let (m_r, m_d) = (cb.m_r, cb.m_d);

    let sd = exact_tails(n, t.b_s, params.signal_sigma_sq(Link::SD))?;
    let p_miss_dest_s = sd.below;
    let p_fa_dest_s = exact_tails(n, t.b_s, 1.0)?.above;
    let p2 = (1.0 - p_miss_dest_s) * pow_complement(p_fa_dest_s, m_d - 1);

    if cb.is_direct() {
        let p_e = 1.0 - p2;
        return Ok(ExactErrorReport {
            p_miss_relay: 0.0,
            p_fa_relay: 0.0,
            p_e11: 0.0,
            p_miss_dest_r: 0.0,
            p_fa_dest_r: 0.0,
            p_e12: 0.0,
            p_miss_dest_s,
            p_fa_dest_s,
            p_e2: p_e,
            p_bin_error: 0.0,
            p_e_total: p_e,
            p_tag_e11: 0.0,
            p_tag_e12: 0.0,
            p_tag_e2: p_e,
        });
    }

    // Relay: the true bin fires through its signal tone or one of its
    // M_D - 1 noise tones; each other bin fires through any of M_D noise tones.
    let p_miss_relay = exact_tails(n, t.a_r, params.signal_sigma_sq(Link::SR))?.below;
    let p_fa_relay = exact_tails(n, t.a_r, 1.0)?.above;
    let true_silent = p_miss_relay * pow_complement(p_fa_relay, m_d - 1);
    let other_fires = any_of(p_fa_relay, m_d);
    let other_quiet = 1.0 - other_fires;
    let relay_ok = (1.0 - true_silent) * other_quiet.powf((m_r - 1) as f64);
    let relay_wrong = (m_r - 1) as f64 * true_silent * other_fires * other_quiet.powf((m_r - 2) as f64);
    let relay_declared = (1.0 - relay_ok - relay_wrong).max(0.0);

    // Destination bin stage, depending on what the relay sent.
    let p_miss_dest_r = exact_tails(n, t.b_r, params.signal_sigma_sq(Link::RD))?.below;
    let p_fa_dest_r = exact_tails(n, t.b_r, 1.0)?.above;
    let bin_if_ok = (1.0 - p_miss_dest_r) * pow_complement(p_fa_dest_r, m_r - 1);
    let bin_if_wrong = p_fa_dest_r * p_miss_dest_r * pow_complement(p_fa_dest_r, m_r - 2);
    let bin_if_silent = p_fa_dest_r * pow_complement(p_fa_dest_r, m_r - 1);
    let lucky = relay_wrong * bin_if_wrong + relay_declared * bin_if_silent;
    let bin_ok = relay_ok * bin_if_ok + lucky;

    let p_e_total = 1.0 - bin_ok * p2;
    let p_tag_e12 = relay_ok * (1.0 - bin_if_ok);
    let p_tag_e2 = relay_ok * bin_if_ok * (1.0 - p2);
    Ok(ExactErrorReport {
        p_miss_relay,
        p_fa_relay,
        p_e11: 1.0 - relay_ok,
        p_miss_dest_r,
        p_fa_dest_r,
        p_e12: 1.0 - bin_if_ok,
        p_miss_dest_s,
        p_fa_dest_s,
        p_e2: 1.0 - p2,
        p_bin_error: 1.0 - bin_ok,
        p_e_total,
        p_tag_e11: (1.0 - relay_ok) - lucky * p2,
        p_tag_e12,
        p_tag_e2,
    })
}
