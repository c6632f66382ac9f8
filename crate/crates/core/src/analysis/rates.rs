use serde::{Deserialize, Serialize};

use super::chernoff::chernoff_exponent;
use crate::binning::CodebookParams;
use crate::channel::SystemParams;
use crate::error::{Error, Result};
use crate::scheme::Thresholds;

/// Default ceiling on `M_S` accepted by the planner.
pub const DEFAULT_MAX_CODEBOOK: u64 = 1 << 50;

/// Wideband rates, all in nats/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub min_cut: f64,
    pub cutset_ub: f64,
    pub block_markov_lb: f64,
    pub capacity_known: bool,
    pub underspread_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegimeKind {
    /// `a^2 <= 1`: the relay is not used.
    Direct,
    /// `1 < a^2 <= 1 + b^2 gamma`: rate set by the source-relay link.
    RelayLimitedBySR,
    /// `a^2 > 1 + b^2 gamma`: rate set by the multiple-access cut.
    RelayLimitedByMACut,
}

impl RegimeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RegimeKind::Direct => "direct",
            RegimeKind::RelayLimitedBySR => "relay_sr_limited",
            RegimeKind::RelayLimitedByMACut => "relay_ma_limited",
        }
    }
}

/// Regime and its split of the min-cut rate into the bin part `r1`
/// (forwarded by the relay) and the within-bin part `r2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub kind: RegimeKind,
    pub r1: f64,
    pub r2: f64,
}

/// Hyperedge capacities of the wideband hypergraph model, nats/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperedges {
    /// Source to relay and destination.
    pub blue: f64,
    /// Source to relay only.
    pub red: f64,
    /// Source to destination only.
    pub black: f64,
    /// Relay to destination.
    pub green: f64,
}

fn scale(params: &SystemParams) -> f64 {
    params.snr_base * params.underspread_factor()
}

/// Hypergraph min-cut, `min{max(1, a^2), 1 + b^2 gamma} P/N0 (1 - 2 Td/Tc)`.
pub fn min_cut_rate(params: &SystemParams) -> f64 {
    params.a_sq.max(1.0).min(1.0 + params.b_sq_gamma()) * scale(params)
}

/// Wideband cut-set upper bound, `min{1 + a^2, 1 + gamma b^2} P/N0`.
pub fn cutset_upper(params: &SystemParams) -> f64 {
    (1.0 + params.a_sq).min(1.0 + params.b_sq_gamma()) * params.snr_base
}

/// Wideband generalized block-Markov lower bound,
/// `min{max(1, a^2), 1 + gamma b^2} P/N0`.
pub fn block_markov_lower(params: &SystemParams) -> f64 {
    params.a_sq.max(1.0).min(1.0 + params.b_sq_gamma()) * params.snr_base
}

pub fn rate_report(params: &SystemParams) -> RateReport {
    RateReport {
        min_cut: min_cut_rate(params),
        cutset_ub: cutset_upper(params),
        block_markov_lb: block_markov_lower(params),
        capacity_known: params.a_sq >= 1.0 + params.b_sq_gamma(),
        underspread_factor: params.underspread_factor(),
    }
}

pub fn classify_regime(params: &SystemParams) -> Regime {
    let s = scale(params);
    let bg = params.b_sq_gamma();
    if params.a_sq <= 1.0 {
        Regime { kind: RegimeKind::Direct, r1: 0.0, r2: s }
    } else if params.a_sq <= 1.0 + bg {
        Regime { kind: RegimeKind::RelayLimitedBySR, r1: (params.a_sq - 1.0) * s, r2: s }
    } else {
        Regime { kind: RegimeKind::RelayLimitedByMACut, r1: bg * s, r2: s }
    }
}

pub fn hyperedges(params: &SystemParams) -> Hyperedges {
    let s = scale(params);
    let relayed = params.a_sq > 1.0;
    Hyperedges {
        blue: if relayed { s } else { 0.0 },
        red: (params.a_sq - 1.0).max(0.0) * s,
        black: if relayed { 0.0 } else { s },
        green: params.b_sq_gamma() * s,
    }
}

/// Rates the scheme carries on each hyperedge at the min-cut operating
/// point: the black edge alone without the relay, otherwise `r2` on blue and
/// `r1` on both red and green.
pub fn hyperedge_flows(params: &SystemParams) -> Hyperedges {
    let r = classify_regime(params);
    match r.kind {
        RegimeKind::Direct => Hyperedges { blue: 0.0, red: 0.0, black: r.r2, green: 0.0 },
        _ => Hyperedges { blue: r.r2, red: r.r1, black: 0.0, green: r.r1 },
    }
}

/// Minimum bandwidths `(W_S, W_R)` in Hz for the source and relay bands.
pub fn bandwidths(cb: &CodebookParams, params: &SystemParams) -> (f64, f64) {
    let window = params.t_s - 2.0 * params.t_d;
    (cb.m_s() as f64 / window, cb.m_r as f64 / window)
}

/// Fraction of the rate carried on the relay bin index.
fn relay_share(params: &SystemParams) -> f64 {
    let r = classify_regime(params);
    let total = r.r1 + r.r2;
    if total > 0.0 {
        r.r1 / total
    } else {
        0.0
    }
}

/// Largest rate at which every Chernoff exponent of the scheme stays
/// positive, for the regime split of the rate and the thresholds implied by
/// the margins. Zero if a needed threshold does not exceed the noise floor.
pub fn chernoff_rate_limit(params: &SystemParams) -> f64 {
    let t = Thresholds::from_params(params);
    let w1 = relay_share(params);
    let w2 = 1.0 - w1;
    let exp = |a: f64| chernoff_exponent(a).unwrap_or(0.0);
    let mut limit = exp(t.b_s) / w2;
    if w1 > 0.0 {
        limit = limit.min(exp(t.a_r)).min(exp(t.b_r) / w1);
    }
    limit * params.theta / params.t_s
}

/// What a rate fraction is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateReference {
    /// [`chernoff_rate_limit`]: finite-duty-factor rate condition with the
    /// configured margins.
    #[default]
    Chernoff,
    /// [`min_cut_rate`].
    MinCut,
}

pub fn reference_rate(params: &SystemParams, reference: RateReference) -> f64 {
    match reference {
        RateReference::Chernoff => chernoff_rate_limit(params),
        RateReference::MinCut => min_cut_rate(params),
    }
}

/// Planner output. Rates are nats/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodebookPlan {
    pub cb: CodebookParams,
    pub thresholds: Thresholds,
    pub rate_target: f64,
    pub r1_target: f64,
    pub r2_target: f64,
    pub r1: f64,
    pub r2: f64,
}

impl CodebookPlan {
    /// Achieved source rate after rounding.
    pub fn rate(&self) -> f64 {
        self.r1 + self.r2
    }
}

/// Sizes a codebook for source rate `rate`, split between bin index and
/// within-bin index in the proportions of the regime.
///
/// Message counts are `round(exp(R_x N T_s / theta))`, at least 1; the
/// reported rates are the ones the rounded sizes achieve.
pub fn plan_codebook(params: &SystemParams, rate: f64, max_m_s: u64) -> Result<CodebookPlan> {
    params.validate()?;
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::Planning(format!("target rate must be positive, got {rate}")));
    }
    let limit = min_cut_rate(params);
    if rate > limit * (1.0 + 1e-12) {
        return Err(Error::Planning(format!(
            "target rate {rate} exceeds the min-cut rate {limit}"
        )));
    }
    let w1 = relay_share(params);
    let (r1_target, r2_target) = (rate * w1, rate * (1.0 - w1));
    let nats_per_rate = params.n as f64 * params.t_s / params.theta;
    let size = |r: f64| -> Result<u64> {
        let ln_m = r * nats_per_rate;
        if ln_m > (max_m_s as f64).ln() + 1.0 {
            return Err(Error::Resource(format!(
                "codebook of e^{ln_m:.1} messages exceeds the cap {max_m_s}"
            )));
        }
        Ok((ln_m.exp().round() as u64).max(1))
    };
    let (m_r, m_d) = (size(r1_target)?, size(r2_target)?);
    let cb = CodebookParams { m_r, m_d };
    match m_r.checked_mul(m_d) {
        Some(m_s) if m_s <= max_m_s => {}
        _ => {
            return Err(Error::Resource(format!(
                "codebook {m_r} x {m_d} exceeds the cap {max_m_s}"
            )))
        }
    }
    Ok(CodebookPlan {
        cb,
        thresholds: Thresholds::from_params(params),
        rate_target: rate,
        r1_target,
        r2_target,
        r1: (m_r as f64).ln() / nats_per_rate,
        r2: (m_d as f64).ln() / nats_per_rate,
    })
}
