//! Peaky frequency-binning relaying scheme, end to end.
//!
//! One trial covers a source block and the relay block that follows it:
//! the source sends message `m` as tone `m`, the relay threshold-decodes the
//! bin `m1` and forwards it as tone `m1` on its own band, and the destination
//! first recovers the bin from the relay signal and then the within-bin offset
//! from the source signal, looking only at the `M_D` tones of that bin.
//!
//! Two engines produce statistically identical outcomes:
//! [`Engine::Correlation`] builds the full correlator output blocks, while
//! [`Engine::Sparse`] samples only the events the threshold decoders look at,
//! which keeps codebooks of 10^6..10^13 messages tractable.

mod sparse;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::binning::{self, CodebookParams, Message};
use crate::channel::{self, CorrelationBlock, GainModel, Link, SystemParams};
use crate::error::{Error, Result};

/// Decision thresholds for the three decoding stages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Relay, on source-relay statistics.
    pub a_r: f64,
    /// Destination bin stage, on relay-destination statistics.
    pub b_r: f64,
    /// Destination within-bin stage, on source-destination statistics.
    pub b_s: f64,
}

impl Thresholds {
    /// `1 + (1 - eps) * signal power` for each link.
    pub fn from_params(params: &SystemParams) -> Self {
        let margin = |link: Link, eps: f64| {
            1.0 + (1.0 - eps) * link.gain_variance(params) * link.signal_power(params)
        };
        Thresholds {
            a_r: margin(Link::SR, params.eps),
            b_r: margin(Link::RD, params.eps1),
            b_s: margin(Link::SD, params.eps2),
        }
    }
}

/// First stage at which a failed trial went wrong.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorType {
    None,
    /// Relay decoded the wrong bin or declared an error.
    E11,
    /// Destination bin stage failed although the relay was right.
    E12,
    /// Within-bin stage failed although the bin was right.
    E2,
}

impl ErrorType {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorType::None => "none",
            ErrorType::E11 => "e11",
            ErrorType::E12 => "e12",
            ErrorType::E2 => "e2",
        }
    }
}

/// Result of one trial. `None` in a stage field means that stage declared an
/// error (or was never reached).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub message: Message,
    pub relay: Option<u64>,
    pub dest_bin: Option<u64>,
    pub dest_msg: Option<u64>,
    pub error_type: ErrorType,
}

impl DecodeOutcome {
    pub fn is_success(&self) -> bool {
        self.error_type == ErrorType::None
    }

    pub fn relay_correct(&self) -> bool {
        self.relay == Some(self.message.m1)
    }

    pub fn bin_correct(&self) -> bool {
        self.dest_bin == Some(self.message.m1)
    }

    fn assemble(message: Message, relay: Option<u64>, dest_bin: Option<u64>, dest_msg: Option<u64>) -> Self {
        let error_type = if dest_msg == Some(message.m) {
            ErrorType::None
        } else if relay != Some(message.m1) {
            ErrorType::E11
        } else if dest_bin != Some(message.m1) {
            ErrorType::E12
        } else {
            ErrorType::E2
        };
        DecodeOutcome { message, relay, dest_bin, dest_msg, error_type }
    }
}

/// Trial engine selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Correlation blocks for small codebooks, sparse sampling otherwise.
    #[default]
    Auto,
    Correlation,
    Sparse,
}

/// Correlator entries per trial above which `Auto` switches to sparse.
pub const AUTO_CORRELATION_LIMIT: u64 = 1 << 16;

impl Engine {
    pub fn resolve(self, params: &SystemParams, cb: &CodebookParams) -> Engine {
        match self {
            Engine::Auto => {
                let cols = cb.m_s().saturating_mul(2).saturating_add(cb.m_r);
                if cols.saturating_mul(params.n as u64) <= AUTO_CORRELATION_LIMIT {
                    Engine::Correlation
                } else {
                    Engine::Sparse
                }
            }
            e => e,
        }
    }
}

/// Everything fixed across the trials of a batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSetup {
    params: SystemParams,
    cb: CodebookParams,
    thresholds: Thresholds,
    gain_model: GainModel,
    engine: Engine,
    noise_tails: sparse::NoiseTails,
}

impl TrialSetup {
    /// Validates the configuration and derives thresholds from the margins.
    pub fn new(params: SystemParams, cb: CodebookParams) -> Result<Self> {
        params.validate()?;
        Self::with_thresholds(params, cb, Thresholds::from_params(&params))
    }

    pub fn with_thresholds(params: SystemParams, cb: CodebookParams, thresholds: Thresholds) -> Result<Self> {
        params.validate()?;
        cb.validate()?;
        for (name, t) in [("a_r", thresholds.a_r), ("b_r", thresholds.b_r), ("b_s", thresholds.b_s)] {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::invalid(format!("threshold {name} must be finite and > 0, got {t}")));
            }
        }
        Ok(TrialSetup {
            params,
            cb,
            thresholds,
            gain_model: GainModel::Rayleigh,
            engine: Engine::Auto,
            noise_tails: sparse::NoiseTails::new(params.n, &thresholds)?,
        })
    }

    pub fn gain_model(mut self, model: GainModel) -> Self {
        self.gain_model = model;
        self
    }

    pub fn engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn codebook(&self) -> &CodebookParams {
        &self.cb
    }

    pub fn thresholds(&self) -> &Thresholds {
        &self.thresholds
    }

    /// The engine actually used, with `Auto` resolved.
    pub fn resolved_engine(&self) -> Engine {
        self.engine.resolve(&self.params, &self.cb)
    }
}

/// `S_k = (1/N) sum_n |R_k(n)|^2` for every column.
pub fn decision_stats(block: &CorrelationBlock) -> Vec<f64> {
    if block.rows == 0 {
        return vec![0.0; block.cols];
    }
    block
        .columns()
        .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>() / block.rows as f64)
        .collect()
}

/// Index of the unique element of `items` flagged by `fires`, if exactly one is.
fn unique<I: Iterator<Item = bool>>(flags: I) -> Option<u64> {
    let mut found = None;
    for (i, f) in flags.enumerate() {
        if f {
            if found.is_some() {
                return None;
            }
            found = Some(i as u64);
        }
    }
    found
}

/// Relay bin decision: the bins holding at least one statistic at or above
/// `a_r`; decodes only when exactly one bin qualifies.
pub fn relay_decode(stats: &[f64], a_r: f64, cb: &CodebookParams) -> Result<Option<u64>> {
    if stats.len() as u64 != cb.m_s() {
        return Err(Error::domain(format!(
            "relay expects {} statistics, got {}",
            cb.m_s(),
            stats.len()
        )));
    }
    Ok(unique(stats.chunks(cb.m_d as usize).map(|bin| bin.iter().any(|&s| s >= a_r))))
}

/// Relay transmission: tone `m1` on the relay band, or nothing after a
/// declared error.
pub fn relay_forward<R: Rng + ?Sized>(
    relay: Option<u64>,
    params: &SystemParams,
    cb: &CodebookParams,
    model: GainModel,
    rng: &mut R,
) -> Result<CorrelationBlock> {
    channel::make_correlations(Link::RD, relay, cb.m_r, params, model, rng)
}

/// Destination bin decision from relay-destination statistics.
pub fn dest_decode_bin(stats: &[f64], b_r: f64) -> Option<u64> {
    unique(stats.iter().map(|&s| s >= b_r))
}

/// Destination within-bin decision; `stats` are the source-destination
/// statistics of the `M_D` tones of the decoded bin.
pub fn dest_decode_within_bin(stats: &[f64], b_s: f64) -> Option<u64> {
    unique(stats.iter().map(|&s| s >= b_s))
}

/// Runs one trial for message `m`.
pub fn run_trial<R: Rng + ?Sized>(m: u64, setup: &TrialSetup, rng: &mut R) -> Result<DecodeOutcome> {
    let message = Message::new(m, &setup.cb)?;
    match setup.resolved_engine() {
        Engine::Sparse => sparse::run_trial(message, setup, rng),
        _ => run_trial_correlation(message, setup, rng),
    }
}

fn run_trial_correlation<R: Rng + ?Sized>(message: Message, setup: &TrialSetup, rng: &mut R) -> Result<DecodeOutcome> {
    let TrialSetup { params, cb, thresholds, gain_model, .. } = setup;
    let m_s = cb.m_s();
    let sr = channel::make_correlations(Link::SR, Some(message.m), m_s, params, *gain_model, rng)?;
    let sd = channel::make_correlations(Link::SD, Some(message.m), m_s, params, *gain_model, rng)?;

    let (relay, dest_bin) = if cb.is_direct() {
        (Some(0), Some(0))
    } else {
        let relay = relay_decode(&decision_stats(&sr), thresholds.a_r, cb)?;
        let rd = relay_forward(relay, params, cb, *gain_model, rng)?;
        (relay, dest_decode_bin(&decision_stats(&rd), thresholds.b_r))
    };

    let dest_msg = match dest_bin {
        Some(bin) => {
            let members = binning::bin_members(bin, cb)?;
            let all = decision_stats(&sd);
            let stats = &all[members.start as usize..members.end as usize];
            match dest_decode_within_bin(stats, thresholds.b_s) {
                Some(m2) => Some(binning::join(bin, m2, cb)?),
                None => None,
            }
        }
        None => None,
    };
    Ok(DecodeOutcome::assemble(message, relay, dest_bin, dest_msg))
}
