//! Event-level trial engine.
//!
//! Threshold decoders only care whether each statistic clears its threshold.
//! Signal tones are simulated exactly: the mean of `N` i.i.d. `|CN(0, s2)|^2`
//! terms is `s2 * Gamma(N, 1) / N`. Noise tones are i.i.d. with exceedance
//! probability `p = Q(N, N * threshold)`, so the indices of exceeding noise
//! tones form a Bernoulli process that is sampled by geometric gaps. Decoding
//! stops as soon as a decision set holds two entries.
//!
//! Draw order per trial: relay signal tone, relay noise in the true bin, relay
//! noise elsewhere, relay-destination signal tone and noise, then the
//! source-destination signal tone and noise of the decoded bin.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use super::{DecodeOutcome, Thresholds, TrialSetup};
use crate::analysis::exact_tails;
use crate::binning::{self, Message};
use crate::channel::Link;
use crate::error::{Error, Result};

/// Per-tone noise exceedance probabilities at the three thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct NoiseTails {
    relay: f64,
    dest_bin: f64,
    dest_msg: f64,
}

impl NoiseTails {
    pub(crate) fn new(n: u32, t: &Thresholds) -> Result<Self> {
        Ok(NoiseTails {
            relay: exact_tails(n, t.a_r, 1.0)?.above,
            dest_bin: exact_tails(n, t.b_r, 1.0)?.above,
            dest_msg: exact_tails(n, t.b_s, 1.0)?.above,
        })
    }
}

/// Increasing indices in `[0, count)` of tones whose noise statistic
/// exceeds its threshold.
struct Exceedances {
    p: f64,
    ln_miss: f64,
    next: u64,
    count: u64,
}

impl Exceedances {
    fn new(p: f64, count: u64) -> Self {
        Exceedances { p, ln_miss: (-p).ln_1p(), next: 0, count }
    }

    fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<u64> {
        if self.next >= self.count || self.p <= 0.0 {
            return None;
        }
        let gap = if self.p >= 1.0 {
            0.0
        } else {
            let u = 1.0 - rng.random::<f64>();
            (u.ln() / self.ln_miss).floor()
        };
        if gap >= (self.count - self.next) as f64 {
            self.next = self.count;
            return None;
        }
        let at = self.next + gap as u64;
        self.next = at + 1;
        Some(at)
    }
}

fn signal_fires<R: Rng + ?Sized>(sigma_sq: f64, n: u32, threshold: f64, rng: &mut R) -> Result<bool> {
    let gamma = Gamma::new(n as f64, 1.0).map_err(|e| Error::domain(e.to_string()))?;
    Ok(sigma_sq * gamma.sample(rng) / n as f64 >= threshold)
}

/// Maps an index among the `count - 1` tones other than `skip` back to the
/// full range.
fn skip_index(i: u64, skip: u64) -> u64 {
    if i >= skip {
        i + 1
    } else {
        i
    }
}

/// Unique decision among `m` tones where tone `sent` (if any) carries
/// signal. Returns the singleton, if the decision set is one.
fn decide_among<R: Rng + ?Sized>(
    m: u64,
    sent: Option<u64>,
    sigma_sq: f64,
    n: u32,
    threshold: f64,
    p_noise: f64,
    rng: &mut R,
) -> Result<Option<u64>> {
    let mut set: Option<u64> = None;
    let noise_count = match sent {
        Some(s) => {
            if signal_fires(sigma_sq, n, threshold, rng)? {
                set = Some(s);
            }
            m - 1
        }
        None => m,
    };
    let mut noise = Exceedances::new(p_noise, noise_count);
    while let Some(i) = noise.sample(rng) {
        let tone = match sent {
            Some(s) => skip_index(i, s),
            None => i,
        };
        if set.is_some() {
            return Ok(None);
        }
        set = Some(tone);
    }
    Ok(set)
}

fn relay_decode<R: Rng + ?Sized>(msg: &Message, setup: &TrialSetup, rng: &mut R) -> Result<Option<u64>> {
    let (params, cb, t) = (&setup.params, &setup.cb, &setup.thresholds);
    let p = setup.noise_tails.relay;
    let true_fires = signal_fires(params.signal_sigma_sq(Link::SR), params.n, t.a_r, rng)?
        || Exceedances::new(p, cb.m_d - 1).sample(rng).is_some();

    let mut fired: Option<u64> = true_fires.then_some(msg.m1);
    let mut others = Exceedances::new(p, (cb.m_r - 1) * cb.m_d);
    while let Some(i) = others.sample(rng) {
        let bin = skip_index(i / cb.m_d, msg.m1);
        match fired {
            None => fired = Some(bin),
            Some(b) if b == bin => {}
            Some(_) => return Ok(None),
        }
    }
    Ok(fired)
}

pub(super) fn run_trial<R: Rng + ?Sized>(msg: Message, setup: &TrialSetup, rng: &mut R) -> Result<DecodeOutcome> {
    let (params, cb, t) = (&setup.params, &setup.cb, &setup.thresholds);
    let (relay, dest_bin) = if cb.is_direct() {
        (Some(0), Some(0))
    } else {
        let relay = relay_decode(&msg, setup, rng)?;
        let bin = decide_among(
            cb.m_r,
            relay,
            params.signal_sigma_sq(Link::RD),
            params.n,
            t.b_r,
            setup.noise_tails.dest_bin,
            rng,
        )?;
        (relay, bin)
    };

    let dest_msg = match dest_bin {
        Some(bin) => {
            let sent = (bin == msg.m1).then_some(msg.m2);
            let m2 = decide_among(
                cb.m_d,
                sent,
                params.signal_sigma_sq(Link::SD),
                params.n,
                t.b_s,
                setup.noise_tails.dest_msg,
                rng,
            )?;
            m2.map(|m2| binning::join(bin, m2, cb)).transpose()?
        }
        None => None,
    };
    Ok(DecodeOutcome::assemble(msg, relay, dest_bin, dest_msg))
}
