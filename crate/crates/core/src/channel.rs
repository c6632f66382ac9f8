//! Correlation-domain channel model.
//!
//! Rather than synthesizing FSK waveforms, the simulator works with the
//! correlator outputs directly: for repetition `n` and candidate tone `k`,
//!
//! ```text
//! R_k(n) = [k == sent] * amp * G(n) + W_k(n),   W_k(n) ~ CN(0, 1)
//! ```
//!
//! where `G(n)` is the aggregate complex gain of the link in repetition `n`
//! and `amp^2` is the per-correlation peak SNR (times `gamma` on the relay
//! link). Guard intervals enter only through `T_s - 2 T_d` inside the peak
//! SNR.
//!
//! Draw order is part of the reproducibility contract: all `N` gains of a
//! block are drawn first, then the noise, column by column (column-major).

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest correlation block (entries) the simulator will allocate.
pub const MAX_BLOCK_ENTRIES: u64 = 1 << 28;

/// Channel and scheme scalars.
///
/// Gains are relative to the source-destination total gain, which is 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemParams {
    /// Source-relay total gain `a^2`.
    pub a_sq: f64,
    /// Relay-destination total gain `b^2`.
    pub b_sq: f64,
    /// Relay to source power ratio.
    pub gamma: f64,
    /// `P_S / N_0` in 1/s.
    pub snr_base: f64,
    /// Symbol duration (s).
    pub t_s: f64,
    /// Delay spread (s).
    pub t_d: f64,
    /// Coherence time (s).
    pub t_c: f64,
    /// Duty factor in (0, 1].
    pub theta: f64,
    /// Repetitions per symbol.
    pub n: u32,
    /// Relay threshold margin.
    pub eps: f64,
    /// Destination bin threshold margin.
    pub eps1: f64,
    /// Destination within-bin threshold margin.
    pub eps2: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            a_sq: 1.5,
            b_sq: 1.5,
            gamma: 1.0,
            snr_base: 1.0,
            t_s: 1.0,
            t_d: 0.0,
            t_c: 1.0,
            theta: 1.0,
            n: 16,
            eps: 0.2,
            eps1: 0.2,
            eps2: 0.2,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [("a_sq", self.a_sq), ("b_sq", self.b_sq), ("gamma", self.gamma), ("t_d", self.t_d)];
        for (name, v) in nonneg {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        let positive = [("snr_base", self.snr_base), ("t_s", self.t_s), ("t_c", self.t_c)];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::invalid(format!("theta must lie in (0, 1], got {}", self.theta)));
        }
        if self.n == 0 {
            return Err(Error::invalid("repetition count n must be >= 1"));
        }
        for (name, v) in [("eps", self.eps), ("eps1", self.eps1), ("eps2", self.eps2)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::invalid(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if self.t_s > self.t_c {
            return Err(Error::invalid(format!(
                "symbol duration t_s={} exceeds coherence time t_c={}",
                self.t_s, self.t_c
            )));
        }
        if 2.0 * self.t_d >= self.t_s {
            return Err(Error::invalid(format!(
                "guard intervals 2*t_d={} leave no integration window in t_s={}",
                2.0 * self.t_d,
                self.t_s
            )));
        }
        Ok(())
    }

    /// `b^2 * gamma`, the relay-destination gain seen at source power.
    pub fn b_sq_gamma(&self) -> f64 {
        self.b_sq * self.gamma
    }

    /// Rate loss from guard intervals, `1 - 2 T_d / T_c`.
    pub fn underspread_factor(&self) -> f64 {
        1.0 - 2.0 * self.t_d / self.t_c
    }

    pub fn peak_snr(&self) -> PeakSnr {
        peak_snr(self)
    }

    /// Second moment of the signal column on `link`.
    pub fn signal_sigma_sq(&self, link: Link) -> f64 {
        1.0 + link.gain_variance(self) * link.signal_power(self)
    }
}

/// Per-correlation peak SNR `rho = (P_S/N_0) (T_s - 2 T_d) / theta`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PeakSnr(pub f64);

impl PeakSnr {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn peak_snr(params: &SystemParams) -> PeakSnr {
    PeakSnr(params.snr_base * (params.t_s - 2.0 * params.t_d) / params.theta)
}

/// The three point-to-point links.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Link {
    /// Source to relay.
    SR,
    /// Source to destination.
    SD,
    /// Relay to destination.
    RD,
}

impl Link {
    /// Variance of the aggregate gain `G(n)`.
    pub fn gain_variance(self, params: &SystemParams) -> f64 {
        match self {
            Link::SR => params.a_sq,
            Link::SD => 1.0,
            Link::RD => params.b_sq,
        }
    }

    /// Squared amplitude multiplying `G(n)` in the signal column.
    pub fn signal_power(self, params: &SystemParams) -> f64 {
        let rho = params.peak_snr().value();
        match self {
            Link::SR | Link::SD => rho,
            Link::RD => params.gamma * rho,
        }
    }
}

/// How aggregate gains are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainModel {
    /// Direct `CN(0, total_gain)` draws.
    #[default]
    Rayleigh,
    /// Explicit sum over `paths` independent path phasors.
    PathSum { paths: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainSequence {
    pub link: Link,
    pub values: Vec<Complex64>,
}

/// One `CN(0, variance)` sample.
pub fn complex_normal<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> Complex64 {
    let s = (0.5 * variance).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

/// `N` i.i.d. aggregate gains for `link`.
pub fn draw_gains<R: Rng + ?Sized>(
    link: Link,
    params: &SystemParams,
    model: GainModel,
    rng: &mut R,
) -> Result<GainSequence> {
    let variance = link.gain_variance(params);
    let values = (0..params.n)
        .map(|_| match model {
            GainModel::Rayleigh => Ok(complex_normal(variance, rng)),
            GainModel::PathSum { paths } => path_sum_gain(paths, variance, rng),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GainSequence { link, values })
}

/// Aggregate gain as a sum of `paths` phasors `a_l exp(-j phi_l)`.
///
/// Per-path amplitudes are `CN(0, total_gain / paths)` and phases uniform on
/// `[0, 2 pi)`, so the sum is exactly `CN(0, total_gain)` for every path
/// count.
pub fn path_sum_gain<R: Rng + ?Sized>(paths: u32, total_gain: f64, rng: &mut R) -> Result<Complex64> {
    if paths == 0 {
        return Err(Error::domain("path count must be >= 1"));
    }
    let per_path = total_gain / paths as f64;
    let mut g = Complex64::new(0.0, 0.0);
    for _ in 0..paths {
        let amp = complex_normal(per_path, rng);
        let phase = rng.random::<f64>() * std::f64::consts::TAU;
        g += amp * Complex64::from_polar(1.0, -phase);
    }
    Ok(g)
}

/// `N x M` correlator outputs for one link, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationBlock {
    pub link: Link,
    pub rows: usize,
    pub cols: usize,
    pub sent: Option<u64>,
    data: Vec<Complex64>,
}

impl CorrelationBlock {
    pub fn from_columns(link: Link, rows: usize, cols: usize, sent: Option<u64>, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::domain(format!(
                "block data has {} entries, expected {rows} x {cols}",
                data.len()
            )));
        }
        Ok(CorrelationBlock { link, rows, cols, sent, data })
    }

    pub fn get(&self, n: usize, k: usize) -> Complex64 {
        self.data[k * self.rows + n]
    }

    pub fn column(&self, k: usize) -> &[Complex64] {
        &self.data[k * self.rows..(k + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[Complex64]> {
        self.data.chunks_exact(self.rows.max(1)).take(self.cols)
    }
}

/// Correlator outputs for a transmission of `sent` (or silence) over `m`
/// candidate tones.
pub fn make_correlations<R: Rng + ?Sized>(
    link: Link,
    sent: Option<u64>,
    m: u64,
    params: &SystemParams,
    model: GainModel,
    rng: &mut R,
) -> Result<CorrelationBlock> {
    if let Some(s) = sent {
        if s >= m {
            return Err(Error::domain(format!("sent index {s} out of range [0, {m})")));
        }
    }
    let rows = params.n as u64;
    let entries = rows
        .checked_mul(m)
        .filter(|&e| e <= MAX_BLOCK_ENTRIES)
        .ok_or_else(|| {
            Error::Resource(format!(
                "correlation block {rows} x {m} exceeds {MAX_BLOCK_ENTRIES} entries"
            ))
        })?;
    let gains = match sent {
        Some(_) => Some(draw_gains(link, params, model, rng)?),
        None => None,
    };
    let amp = link.signal_power(params).sqrt();
    let mut data = Vec::with_capacity(entries as usize);
    for k in 0..m {
        for n in 0..rows as usize {
            let mut r = complex_normal(1.0, rng);
            if sent == Some(k) {
                if let Some(g) = &gains {
                    r += amp * g.values[n];
                }
            }
            data.push(r);
        }
    }
    CorrelationBlock::from_columns(link, rows as usize, m as usize, sent, data)
}
