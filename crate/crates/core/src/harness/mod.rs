//! Seeded Monte Carlo batches, parameter sweeps and record output.
//!
//! Trial `i` of a batch draws from ChaCha8 keyed by the batch seed on stream
//! `i`, so every trial's randomness is fixed before any trial runs. Per-trial
//! outcomes are reduced as integer counts, which makes aggregates independent
//! of scheduling. Every sweep point reuses the configured seed.

mod config;
mod emit;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    self, ChernoffBounds, ExactErrorReport, Hyperedges, RateReference, RateReport, Regime,
};
use crate::binning::CodebookParams;
use crate::channel::SystemParams;
use crate::error::{Error, Result};
use crate::scheme::{self, DecodeOutcome, Engine, ErrorType, Thresholds, TrialSetup};

pub use config::{
    parse_override, parse_override_value, set_dotted, Axis, AxisRange, AxisValues, ExperimentConfig, RateTarget,
    SweepParam, SweepSpec,
};
pub use emit::{emit, read_jsonl, write_csv, write_jsonl, OutputFormat, CSV_COLUMNS, SCHEMA_VERSION};

/// Bundled configurations, by name.
pub const PRESETS: &[(&str, &str)] = &[
    ("example", include_str!("../../presets/example.json")),
    ("fig3", include_str!("../../presets/fig3.json")),
    ("n-scaling", include_str!("../../presets/n-scaling.json")),
    ("oracle-grid", include_str!("../../presets/oracle-grid.json")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;
/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.575_829_303_548_900_4;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Outcome tallies of a batch. All fields add componentwise.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchCounts {
    pub trials: u64,
    pub none: u64,
    pub e11: u64,
    pub e12: u64,
    pub e2: u64,
    /// Trials where the relay decoded the correct bin.
    pub relay_ok: u64,
    /// Of those, trials where the destination also found the correct bin.
    pub bin_ok_given_relay_ok: u64,
    /// Trials where the destination found the correct bin.
    pub bin_ok: u64,
}

impl BatchCounts {
    fn from_outcome(o: &DecodeOutcome) -> Self {
        let relay_ok = o.relay_correct();
        let bin_ok = o.bin_correct();
        BatchCounts {
            trials: 1,
            none: (o.error_type == ErrorType::None) as u64,
            e11: (o.error_type == ErrorType::E11) as u64,
            e12: (o.error_type == ErrorType::E12) as u64,
            e2: (o.error_type == ErrorType::E2) as u64,
            relay_ok: relay_ok as u64,
            bin_ok_given_relay_ok: (relay_ok && bin_ok) as u64,
            bin_ok: bin_ok as u64,
        }
    }

    fn add(self, o: Self) -> Self {
        BatchCounts {
            trials: self.trials + o.trials,
            none: self.none + o.none,
            e11: self.e11 + o.e11,
            e12: self.e12 + o.e12,
            e2: self.e2 + o.e2,
            relay_ok: self.relay_ok + o.relay_ok,
            bin_ok_given_relay_ok: self.bin_ok_given_relay_ok + o.bin_ok_given_relay_ok,
            bin_ok: self.bin_ok + o.bin_ok,
        }
    }

    pub fn errors(&self) -> u64 {
        self.trials - self.none
    }
}

/// Random stream of trial `index` in a batch seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs `trials` trials with uniformly drawn messages and tallies them.
pub fn simulate(setup: &TrialSetup, trials: u64, seed: u64) -> Result<BatchCounts> {
    let m_s = setup.codebook().m_s();
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let m = rng.random_range(0..m_s);
            scheme::run_trial(m, setup, &mut rng).map(|o| BatchCounts::from_outcome(&o))
        })
        .try_reduce(BatchCounts::default, |a, b| Ok(a.add(b)))
}

/// Monte Carlo part of a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub engine: Engine,
    pub seed: u64,
    pub counts: BatchCounts,
    pub p_e_hat: f64,
    /// 95% Wilson interval.
    pub ci_low: f64,
    pub ci_high: f64,
    pub ci_halfwidth: f64,
    pub wall_time_s: f64,
}

impl SimulationSummary {
    pub fn run(setup: &TrialSetup, trials: u64, seed: u64) -> Result<Self> {
        let start = Instant::now();
        let counts = simulate(setup, trials, seed)?;
        let errors = counts.errors();
        let (ci_low, ci_high) = wilson_interval(errors, trials, Z95);
        Ok(SimulationSummary {
            engine: setup.resolved_engine(),
            seed,
            counts,
            p_e_hat: errors as f64 / trials as f64,
            ci_low,
            ci_high,
            ci_halfwidth: (ci_high - ci_low) / 2.0,
            wall_time_s: start.elapsed().as_secs_f64(),
        })
    }
}

/// Simulation joined with the analysis of the same configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialBatchResult {
    #[serde(flatten)]
    pub simulation: SimulationSummary,
    pub exact: ExactErrorReport,
    pub bounds: ChernoffBounds,
}

/// How the codebook of a point was obtained from its rate target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannedTarget {
    pub reference: RateReference,
    pub reference_rate: f64,
    pub rate_fraction: Option<f64>,
    pub rate_target: f64,
}

/// Everything computed at one configuration. Rates are nats/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub rho: f64,
    pub rates: RateReport,
    pub regime: Regime,
    /// Hyperedge capacities.
    pub hyperedges: Hyperedges,
    /// Rates carried on each hyperedge at the min-cut point.
    pub flows: Hyperedges,
    pub chernoff_rate_limit: f64,
    pub thresholds: Thresholds,
    pub target: Option<PlannedTarget>,
    pub codebook: Option<CodebookParams>,
    /// Achieved bin and within-bin rates of the codebook.
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub exact: Option<ExactErrorReport>,
    pub bounds: Option<ChernoffBounds>,
    pub simulation: Option<SimulationSummary>,
}

/// One emitted row: a sweep point and either its result or its failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub point: usize,
    pub case: Option<usize>,
    pub params: SystemParams,
    pub result: Option<PointResult>,
    pub error: Option<String>,
}

fn resolve_codebook(cfg: &ExperimentConfig) -> Result<(Option<CodebookParams>, Option<PlannedTarget>)> {
    if let Some(cb) = cfg.codebook {
        return Ok((Some(cb), None));
    }
    let Some(t) = cfg.target else {
        return Ok((None, None));
    };
    let reference_rate = analysis::reference_rate(&cfg.params, t.reference);
    let rate_target = match (t.rate, t.rate_fraction) {
        (Some(r), _) => r,
        (None, Some(f)) => f * reference_rate,
        (None, None) => return Err(Error::Config("target needs rate or rate_fraction".into())),
    };
    let plan = analysis::plan_codebook(&cfg.params, rate_target, cfg.max_codebook)?;
    Ok((
        Some(plan.cb),
        Some(PlannedTarget { reference: t.reference, reference_rate, rate_fraction: t.rate_fraction, rate_target }),
    ))
}

fn achieved_rates(params: &SystemParams, cb: &CodebookParams) -> (f64, f64) {
    let nats_per_rate = params.n as f64 * params.t_s / params.theta;
    ((cb.m_r as f64).ln() / nats_per_rate, (cb.m_d as f64).ln() / nats_per_rate)
}

/// Analysis and, if enabled, simulation of a single configuration.
pub fn evaluate(cfg: &ExperimentConfig) -> Result<PointResult> {
    cfg.validate()?;
    let params = &cfg.params;
    let thresholds = Thresholds::from_params(params);
    let (codebook, target) = resolve_codebook(cfg)?;
    let mut out = PointResult {
        rho: params.peak_snr().value(),
        rates: analysis::rate_report(params),
        regime: analysis::classify_regime(params),
        hyperedges: analysis::hyperedges(params),
        flows: analysis::hyperedge_flows(params),
        chernoff_rate_limit: analysis::chernoff_rate_limit(params),
        thresholds,
        target,
        codebook,
        r1: None,
        r2: None,
        exact: None,
        bounds: None,
        simulation: None,
    };
    if let Some(cb) = codebook {
        let (r1, r2) = achieved_rates(params, &cb);
        out.r1 = Some(r1);
        out.r2 = Some(r2);
        out.exact = Some(analysis::exact_end_to_end(params, &cb, &thresholds)?);
        out.bounds = Some(analysis::chernoff_error_bounds(params, &cb, &thresholds)?);
        if cfg.simulate {
            let setup = TrialSetup::new(*params, cb)?.engine(cfg.engine).gain_model(cfg.gain_model);
            out.simulation = Some(SimulationSummary::run(&setup, cfg.trials, cfg.seed)?);
        }
    }
    Ok(out)
}

/// Runs the configured batch. Needs a codebook or a rate target.
pub fn run_batch(cfg: &ExperimentConfig) -> Result<TrialBatchResult> {
    let cfg = ExperimentConfig { simulate: true, ..cfg.clone() };
    let r = evaluate(&cfg)?;
    match (r.simulation, r.exact, r.bounds) {
        (Some(simulation), Some(exact), Some(bounds)) => Ok(TrialBatchResult { simulation, exact, bounds }),
        _ => Err(Error::Config("a batch needs either a codebook or a rate target".into())),
    }
}

/// Configurations of every sweep point, with their case index. Axis
/// failures are deferred to the point they affect.
pub fn sweep_points(cfg: &ExperimentConfig) -> Result<Vec<(Option<usize>, Result<ExperimentConfig>)>> {
    let sweep_spec = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("no sweep section in the configuration".into()))?;
    if sweep_spec.axes.is_empty() && sweep_spec.cases.is_empty() {
        return Err(Error::Config("sweep needs at least one axis or case".into()));
    }
    let base = ExperimentConfig { sweep: None, ..cfg.clone() };
    let mut cases = Vec::new();
    if sweep_spec.cases.is_empty() {
        cases.push((None, base.clone()));
    }
    for (i, case) in sweep_spec.cases.iter().enumerate() {
        if case.keys().any(|k| k == "sweep" || k.starts_with("sweep.")) {
            return Err(Error::Config(format!("sweep case {i} may not override the sweep")));
        }
        let c = base
            .with_overrides(case.iter().map(|(k, v)| (k.as_str(), v.clone())))
            .map_err(|e| Error::Config(format!("sweep case {i}: {e}")))?;
        cases.push((Some(i), c));
    }
    let axes: Vec<(SweepParam, Vec<f64>)> = sweep_spec
        .axes
        .iter()
        .map(|a| Ok((a.param, a.values.expand()?)))
        .collect::<Result<_>>()?;

    let combos: usize = axes.iter().map(|(_, v)| v.len()).product();
    let mut points = Vec::new();
    for (case, c) in cases {
        for flat in 0..combos {
            let mut p = c.clone();
            // Mixed-radix digits of `flat`, last axis fastest.
            let mut rest = flat;
            let mut coords = vec![0.0; axes.len()];
            for (slot, (_, values)) in coords.iter_mut().zip(&axes).rev() {
                *slot = values[rest % values.len()];
                rest /= values.len();
            }
            let set = axes.iter().zip(&coords).try_for_each(|((param, _), &v)| p.set_axis(*param, v));
            points.push((case, set.map(|_| p)));
        }
    }
    Ok(points)
}

/// Runs every sweep point, calling `on_point` after each. Point failures are
/// recorded and the sweep continues.
pub fn sweep_with<F>(cfg: &ExperimentConfig, mut on_point: F) -> Result<Vec<SweepRecord>>
where
    F: FnMut(&SweepRecord, usize),
{
    let points = sweep_points(cfg)?;
    let total = points.len();
    let mut records = Vec::with_capacity(total);
    for (point, (case, p)) in points.into_iter().enumerate() {
        let (params, outcome) = match p {
            Ok(p) => (p.params, evaluate(&p)),
            Err(e) => (cfg.params, Err(e)),
        };
        let (result, error) = match outcome {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let rec = SweepRecord { point, case, params, result, error };
        on_point(&rec, total);
        records.push(rec);
    }
    Ok(records)
}

pub fn sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRecord>> {
    sweep_with(cfg, |_, _| {})
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn presets_parse() {
        for (name, text) in PRESETS {
            let cfg = ExperimentConfig::from_json_str(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            cfg.validate().unwrap();
            if cfg.sweep.is_some() {
                assert!(sweep_points(&cfg).unwrap().iter().all(|(_, p)| p.is_ok()), "{name}");
            }
        }
        assert!(preset("nope").is_none());
    }

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(0, 10, Z95);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.277_528).abs() < 1e-5);
        let (lo, hi) = wilson_interval(50, 100, Z95);
        assert!((lo - 0.403_832).abs() < 1e-5 && (hi - 0.596_168).abs() < 1e-5);
        let (lo, hi) = wilson_interval(10, 10, Z95);
        assert!((hi - 1.0).abs() < 1e-12 && (lo - 0.722_472).abs() < 1e-5);
    }

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            params: SystemParams { snr_base: 2.0, n: 8, ..Default::default() },
            codebook: Some(CodebookParams { m_r: 2, m_d: 2 }),
            trials: 400,
            seed: 11,
            ..Default::default()
        }
    }

    #[test]
    fn counts_are_consistent() {
        let r = run_batch(&small()).unwrap();
        let c = r.simulation.counts;
        assert_eq!(c.trials, 400);
        assert_eq!(c.none + c.e11 + c.e12 + c.e2, 400);
        assert!(c.e11 <= c.trials - c.relay_ok);
        assert!(c.bin_ok_given_relay_ok <= c.relay_ok && c.bin_ok_given_relay_ok <= c.bin_ok);
        assert!(r.simulation.ci_halfwidth > 0.0);
        assert!((0.0..=1.0).contains(&r.simulation.p_e_hat));
    }

    #[test]
    fn batch_is_deterministic() {
        let mut a = run_batch(&small()).unwrap();
        let mut b = run_batch(&small()).unwrap();
        a.simulation.wall_time_s = 0.0;
        b.simulation.wall_time_s = 0.0;
        assert_eq!(a, b);
        let mut other = small();
        other.seed = 12;
        assert_ne!(run_batch(&other).unwrap().simulation.counts, a.simulation.counts);
    }

    #[test]
    fn batch_needs_a_codebook() {
        let cfg = ExperimentConfig { codebook: None, ..small() };
        assert!(matches!(run_batch(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn sweep_enumerates_product_in_order() {
        let mut cfg = small();
        cfg.simulate = false;
        cfg.sweep = Some(SweepSpec {
            axes: vec![
                Axis { param: SweepParam::N, values: AxisValues::List(vec![4.0, 8.0]) },
                Axis { param: SweepParam::ASq, values: AxisValues::List(vec![0.5, 1.5, 2.5]) },
            ],
            cases: vec![],
        });
        let recs = sweep(&cfg).unwrap();
        let got: Vec<(u32, f64)> = recs.iter().map(|r| (r.params.n, r.params.a_sq)).collect();
        assert_eq!(
            got,
            vec![(4, 0.5), (4, 1.5), (4, 2.5), (8, 0.5), (8, 1.5), (8, 2.5)]
        );
        assert!(recs.iter().all(|r| r.error.is_none()));
    }

    #[test]
    fn sweep_records_point_failures_and_continues() {
        let mut cfg = small();
        cfg.simulate = false;
        cfg.sweep = Some(SweepSpec {
            axes: vec![Axis { param: SweepParam::Theta, values: AxisValues::List(vec![0.5, -1.0, 1.0]) }],
            cases: vec![],
        });
        let recs = sweep(&cfg).unwrap();
        assert_eq!(recs.len(), 3);
        assert!(recs[0].error.is_none() && recs[2].error.is_none());
        assert!(recs[1].error.is_some() && recs[1].result.is_none());
    }

    #[test]
    fn sweep_cases_cross_axes() {
        let mut cfg = small();
        cfg.simulate = false;
        let case = |m_r: u64| {
            let mut m = serde_json::Map::new();
            m.insert("codebook.m_r".into(), json!(m_r));
            m
        };
        cfg.sweep = Some(SweepSpec {
            axes: vec![Axis { param: SweepParam::N, values: AxisValues::List(vec![4.0, 8.0]) }],
            cases: vec![case(2), case(4)],
        });
        let recs = sweep(&cfg).unwrap();
        let got: Vec<(Option<usize>, u64, u32)> = recs
            .iter()
            .map(|r| (r.case, r.result.as_ref().unwrap().codebook.unwrap().m_r, r.params.n))
            .collect();
        assert_eq!(got, vec![(Some(0), 2, 4), (Some(0), 2, 8), (Some(1), 4, 4), (Some(1), 4, 8)]);
    }

    #[test]
    fn empty_sweep_is_rejected() {
        let mut cfg = small();
        cfg.sweep = Some(SweepSpec::default());
        assert!(matches!(sweep(&cfg), Err(Error::Config(_))));
        cfg.sweep = None;
        assert!(matches!(sweep(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn rate_target_plans_a_codebook() {
        let cfg = ExperimentConfig {
            params: SystemParams { a_sq: 1.5, b_sq: 1.5, snr_base: 1.0, theta: 1.0, n: 16, ..Default::default() },
            target: Some(RateTarget { rate_fraction: Some(0.5), ..Default::default() }),
            simulate: false,
            ..Default::default()
        };
        let r = evaluate(&cfg).unwrap();
        let t = r.target.unwrap();
        assert!((t.rate_target - 0.5 * r.chernoff_rate_limit).abs() < 1e-12);
        let cb = r.codebook.unwrap();
        assert!(cb.m_r > 1 && cb.m_d > 1);
        assert!(!r.bounds.unwrap().clamped);
    }
}
