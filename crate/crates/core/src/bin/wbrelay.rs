//! Command-line front end.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use wbrelay::analysis::RegimeKind;
use wbrelay::harness::{self, ExperimentConfig, OutputFormat, PointResult, SweepRecord, Z95};
use wbrelay::Error;

#[derive(Parser)]
#[command(name = "wbrelay", version, about = "Wideband fading relay channel: rate bounds, Monte Carlo and exact error rates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the wideband rate bounds, regime and hyperedge capacities.
    Rates(CommonArgs),
    /// Run one Monte Carlo batch and compare it with the exact error rate.
    Simulate(CommonArgs),
    /// Run the sweep section of the configuration.
    Sweep(CommonArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON configuration file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Bundled configuration: example, fig3, n-scaling or oracle-grid.
    #[arg(long)]
    preset: Option<String>,
    /// Override a configuration value, e.g. `--set params.a_sq=2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Write records here; sweeps write to stdout without it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Suppress progress and summary output.
    #[arg(long)]
    quiet: bool,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn load(args: &CommonArgs) -> Result<ExperimentConfig, Failure> {
    let mut overrides = Vec::new();
    for s in &args.set {
        overrides.push(harness::parse_override(s).map_err(|e| Failure::Usage(e.to_string()))?);
    }
    if let Some(seed) = args.seed {
        overrides.push(("seed".into(), seed.to_string()));
    }
    if let Some(trials) = args.trials {
        overrides.push(("trials".into(), trials.to_string()));
    }
    let cfg = match (&args.config, &args.preset) {
        (Some(path), _) => ExperimentConfig::load(path, &overrides),
        (None, Some(name)) => {
            let text = harness::preset(name).ok_or_else(|| {
                let names: Vec<&str> = harness::PRESETS.iter().map(|(n, _)| *n).collect();
                Failure::Usage(format!("unknown preset {name:?}; available: {}", names.join(", ")))
            })?;
            ExperimentConfig::parse_with_overrides(text, &format!("preset {name}"), &overrides)
        }
        (None, None) => ExperimentConfig::parse_with_overrides("{}", "defaults", &overrides),
    }
    .map_err(|e| Failure::Usage(e.to_string()))?;
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn output_format(f: Format) -> OutputFormat {
    match f {
        Format::Csv => OutputFormat::Csv,
        Format::Jsonl => OutputFormat::Jsonl,
    }
}

fn write_records(records: &[SweepRecord], args: &CommonArgs) -> Result<(), Failure> {
    let format = output_format(args.format);
    match &args.out {
        Some(path) => harness::emit(records, format, path)?,
        None => {
            let stdout = std::io::stdout().lock();
            match format {
                OutputFormat::Csv => harness::write_csv(records, stdout).map_err(|e| Failure::Runtime(e.to_string()))?,
                OutputFormat::Jsonl => harness::write_jsonl(records, stdout).map_err(|e| Failure::Runtime(e.to_string()))?,
            }
        }
    }
    Ok(())
}

fn bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}

fn print_rates(cfg: &ExperimentConfig, r: &PointResult) {
    let p = &cfg.params;
    println!("a^2 = {}, b^2 gamma = {}, P/N0 = {} 1/s, Td/Tc = {}", p.a_sq, p.b_sq_gamma(), p.snr_base, p.t_d / p.t_c);
    println!("rates in bits/s");
    println!("  min-cut                 {:.6}", bits(r.rates.min_cut));
    println!("  cut-set upper bound     {:.6}", bits(r.rates.cutset_ub));
    println!("  block-Markov lower bnd  {:.6}", bits(r.rates.block_markov_lb));
    println!("  capacity known          {}", if r.rates.capacity_known { "yes" } else { "no" });
    let kind = match r.regime.kind {
        RegimeKind::Direct => "direct (relay unused)",
        RegimeKind::RelayLimitedBySR => "relay, limited by source-relay link",
        RegimeKind::RelayLimitedByMACut => "relay, limited by multiple-access cut",
    };
    println!("  regime                  {kind}");
    println!("  bin rate r1             {:.6}", bits(r.regime.r1));
    println!("  within-bin rate r2      {:.6}", bits(r.regime.r2));
    println!("hyperedges in bits/s           capacity        used");
    let edges = [
        ("blue  (S -> R, D)", r.hyperedges.blue, r.flows.blue),
        ("red   (S -> R)", r.hyperedges.red, r.flows.red),
        ("black (S -> D)", r.hyperedges.black, r.flows.black),
        ("green (R -> D)", r.hyperedges.green, r.flows.green),
    ];
    for (name, cap, used) in edges {
        println!("  {name:<22} {:>12.6} {:>12.6}", bits(cap), bits(used));
    }
    println!("scheme at rho = {:.6}, N = {}", r.rho, p.n);
    println!("  Chernoff rate limit     {:.6}", bits(r.chernoff_rate_limit));
}

fn print_simulation(r: &PointResult) {
    let (Some(cb), Some(exact), Some(bounds)) = (r.codebook, r.exact, r.bounds) else {
        return;
    };
    println!("codebook M_R = {}, M_D = {} (M_S = {}), rate {:.6} bits/s", cb.m_r, cb.m_d, cb.m_s(), bits(r.r1.unwrap_or(0.0) + r.r2.unwrap_or(0.0)));
    println!("thresholds A_R = {:.6}, B_R = {:.6}, B_S = {:.6}", r.thresholds.a_r, r.thresholds.b_r, r.thresholds.b_s);
    if let Some(s) = &r.simulation {
        let c = s.counts;
        println!(
            "p_e_hat = {:.6} +/- {:.6} (95% Wilson [{:.6}, {:.6}]), {} trials, {:?} engine, {:.3} s",
            s.p_e_hat, s.ci_halfwidth, s.ci_low, s.ci_high, c.trials, s.engine, s.wall_time_s
        );
        let frac = |k: u64, n: u64| if n == 0 { f64::NAN } else { k as f64 / n as f64 };
        println!("{:<8} {:>12} {:>12} {:>12}", "stage", "simulated", "exact", "Chernoff");
        println!("{:<8} {:>12.6} {:>12.6} {:>12.6}", "e11", frac(c.trials - c.relay_ok, c.trials), exact.p_e11, bounds.e11.bound);
        println!("{:<8} {:>12.6} {:>12.6} {:>12.6}", "e12", 1.0 - frac(c.bin_ok_given_relay_ok, c.relay_ok), exact.p_e12, bounds.e12.bound);
        println!("{:<8} {:>12.6} {:>12.6} {:>12.6}", "e2", 1.0 - frac(c.none, c.bin_ok), exact.p_e2, bounds.e2.bound);
        println!("{:<8} {:>12.6} {:>12.6} {:>12.6}", "total", s.p_e_hat, exact.p_e_total, bounds.total);
        let (lo, hi) = harness::wilson_interval(c.errors(), c.trials, Z95);
        let inside = exact.p_e_total >= lo && exact.p_e_total <= hi;
        println!("exact value {} the 95% interval", if inside { "inside" } else { "outside" });
    } else {
        println!("exact p_e = {:.6}, Chernoff bound = {:.6}", exact.p_e_total, bounds.total);
    }
    if bounds.clamped {
        println!("warning: a rate condition is violated; Chernoff bounds are clamped to 1");
    }
}

fn rates(args: &CommonArgs) -> Result<(), Failure> {
    let mut cfg = load(args)?;
    cfg.simulate = false;
    cfg.sweep = None;
    let r = harness::evaluate(&cfg)?;
    if !args.quiet {
        print_rates(&cfg, &r);
    }
    if args.out.is_some() {
        let rec = SweepRecord { point: 0, case: None, params: cfg.params, result: Some(r), error: None };
        write_records(&[rec], args)?;
    }
    Ok(())
}

fn simulate(args: &CommonArgs) -> Result<(), Failure> {
    let mut cfg = load(args)?;
    cfg.simulate = true;
    cfg.sweep = None;
    if cfg.codebook.is_none() && cfg.target.is_none() {
        return Err(Failure::Usage("simulate needs a codebook or a rate target in the configuration".into()));
    }
    let r = harness::evaluate(&cfg)?;
    if !args.quiet {
        print_simulation(&r);
    }
    let rec = SweepRecord { point: 0, case: None, params: cfg.params, result: Some(r), error: None };
    if args.out.is_some() {
        write_records(&[rec], args)?;
    }
    Ok(())
}

fn sweep(args: &CommonArgs) -> Result<(), Failure> {
    let cfg = load(args)?;
    harness::sweep_points(&cfg).map_err(|e| Failure::Usage(e.to_string()))?;
    let quiet = args.quiet;
    let records = harness::sweep_with(&cfg, |rec, total| {
        let mut err = std::io::stderr().lock();
        if let Some(e) = &rec.error {
            let _ = writeln!(err, "warning: point {}/{total} failed: {e}", rec.point + 1);
        } else if !quiet {
            let detail = rec
                .result
                .as_ref()
                .and_then(|r| r.simulation.as_ref().map(|s| (s.p_e_hat, r.exact.map(|e| e.p_e_total))));
            let msg = match detail {
                Some((p, Some(x))) => format!(" p_e_hat={p:.4e} exact={x:.4e}"),
                _ => String::new(),
            };
            let _ = writeln!(err, "point {}/{total} done{msg}", rec.point + 1);
        }
    })?;
    write_records(&records, args)?;
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    if failed == records.len() {
        return Err(Failure::Runtime(format!("all {failed} sweep points failed")));
    }
    if failed > 0 && !quiet {
        eprintln!("{failed} of {} points failed", records.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Rates(a) => rates(a),
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
