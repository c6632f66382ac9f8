//! Chernoff machinery for the threshold decoders.
//!
//! A noise statistic is the mean of `N` unit exponentials, whose moment
//! generating function gives, for any `u = r/N` in `(0, 1)`,
//! `Pr{S >= A} <= exp(-N g_A(u))` with `g_A(u) = A u + ln(1 - u)`. The best
//! choice `u = 1 - 1/A` yields the exponent `A - 1 - ln A`.

use serde::{Deserialize, Serialize};

use super::exact::exact_tails;
use crate::binning::CodebookParams;
use crate::channel::{Link, SystemParams};
use crate::error::{Error, Result};
use crate::scheme::Thresholds;

pub fn g_function(a: f64, u: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::domain(format!("g_A(u) needs 0 <= u < 1, got u={u}")));
    }
    Ok(a * u + (-u).ln_1p())
}

/// `A - 1 - ln A`, the optimized Chernoff exponent of a unit-mean
/// statistic against threshold `A`.
pub fn chernoff_exponent(a: f64) -> Result<f64> {
    if !(a > 1.0) || !a.is_finite() {
        return Err(Error::domain(format!(
            "Chernoff exponent needs a threshold above the noise floor (A > 1), got {a}"
        )));
    }
    // a - 1 - ln a, written to avoid cancellation near a = 1.
    let x = a - 1.0;
    Ok(x - x.ln_1p())
}

/// Bound on one decoding stage: the exact miss probability plus the union
/// of Chernoff false-alarm bounds, clamped to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageBound {
    pub threshold: f64,
    /// `ln(M) / N`, which equals `R_x T_s / theta` for the stage's rate.
    pub rate_term: f64,
    /// `A - 1 - ln A - rate_term`; the bound decays in `N` iff positive.
    pub exponent: f64,
    pub miss: f64,
    pub false_alarm: f64,
    pub bound: f64,
    /// False when the stage's rate condition is violated and the bound was
    /// clamped.
    pub rate_condition_met: bool,
    /// False for the relay stages of a single-bin codebook, which do not
    /// exist and bound to 0.
    pub active: bool,
}

impl StageBound {
    fn inactive(threshold: f64) -> Self {
        StageBound {
            threshold,
            rate_term: 0.0,
            exponent: 0.0,
            miss: 0.0,
            false_alarm: 0.0,
            bound: 0.0,
            rate_condition_met: true,
            active: false,
        }
    }

    fn new(n: u32, candidates: u64, threshold: f64, signal_sigma_sq: f64) -> Result<Self> {
        let n_f = n as f64;
        let rate_term = (candidates as f64).ln() / n_f;
        let miss = exact_tails(n, threshold, signal_sigma_sq)?.below;
        // A threshold at or below the noise mean gives no exponent at all.
        let Ok(e) = chernoff_exponent(threshold) else {
            return Ok(StageBound {
                threshold,
                rate_term,
                exponent: -rate_term,
                miss,
                false_alarm: 1.0,
                bound: 1.0,
                rate_condition_met: false,
                active: true,
            });
        };
        let exponent = e - rate_term;
        let false_alarm = (-n_f * exponent).exp().min(1.0);
        Ok(StageBound {
            threshold,
            rate_term,
            exponent,
            miss,
            false_alarm,
            bound: (miss + false_alarm).min(1.0),
            rate_condition_met: exponent > 0.0,
            active: true,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChernoffBounds {
    pub e11: StageBound,
    pub e12: StageBound,
    pub e2: StageBound,
    /// `min(1, e11 + e12 + e2)`.
    pub total: f64,
    /// Set when any stage violates its rate condition.
    pub clamped: bool,
}

/// Union/Chernoff bounds on the three error events.
///
/// The relay stage compares `M_S` tones against `A_R`, the destination bin
/// stage `M_R` tones against `B_R`, the within-bin stage `M_D` tones against
/// `B_S`. With a single bin the relay stages do not exist and bound to 0.
pub fn chernoff_error_bounds(params: &SystemParams, cb: &CodebookParams, t: &Thresholds) -> Result<ChernoffBounds> {
    params.validate()?;
    cb.validate()?;
    let n = params.n;
    let (e11, e12) = if cb.is_direct() {
        (StageBound::inactive(t.a_r), StageBound::inactive(t.b_r))
    } else {
        (
            StageBound::new(n, cb.m_s(), t.a_r, params.signal_sigma_sq(Link::SR))?,
            StageBound::new(n, cb.m_r, t.b_r, params.signal_sigma_sq(Link::RD))?,
        )
    };
    let e2 = StageBound::new(n, cb.m_d, t.b_s, params.signal_sigma_sq(Link::SD))?;
    Ok(ChernoffBounds {
        total: (e11.bound + e12.bound + e2.bound).min(1.0),
        clamped: !(e11.rate_condition_met && e12.rate_condition_met && e2.rate_condition_met),
        e11,
        e12,
        e2,
    })
}
