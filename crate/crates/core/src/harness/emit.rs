//! CSV and JSON-lines output of sweep records.
//!
//! CSV columns are fixed (see [`CSV_COLUMNS`]); missing values are empty
//! cells and floats carry 17 significant digits. Wall-clock time appears only
//! in JSON-lines output, so CSV from a fixed seed is byte-reproducible.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SweepRecord;
use crate::error::{Error, Result};

/// Version of the record layout, written into every JSON line.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Jsonl,
}

pub const CSV_COLUMNS: &[&str] = &[
    "point",
    "case",
    "status",
    "a_sq",
    "b_sq",
    "gamma",
    "b_sq_gamma",
    "snr_base",
    "t_s",
    "t_d",
    "t_c",
    "theta",
    "n",
    "eps",
    "eps1",
    "eps2",
    "rho",
    "regime",
    "min_cut",
    "cutset_ub",
    "block_markov_lb",
    "capacity_known",
    "edge_blue",
    "edge_red",
    "edge_black",
    "edge_green",
    "flow_blue",
    "flow_red",
    "flow_black",
    "flow_green",
    "chernoff_rate_limit",
    "rate_reference",
    "reference_rate",
    "rate_fraction",
    "rate_target",
    "m_r",
    "m_d",
    "m_s",
    "r1",
    "r2",
    "rate",
    "a_r",
    "b_r",
    "b_s",
    "exact_p_e",
    "exact_p_e11",
    "exact_p_e12",
    "exact_p_e2",
    "exact_tag_e11",
    "exact_tag_e12",
    "exact_tag_e2",
    "chernoff_e11",
    "chernoff_e12",
    "chernoff_e2",
    "chernoff_total",
    "chernoff_clamped",
    "engine",
    "seed",
    "trials",
    "count_none",
    "count_e11",
    "count_e12",
    "count_e2",
    "relay_ok",
    "bin_ok_given_relay_ok",
    "bin_ok",
    "p_e_hat",
    "ci_low",
    "ci_high",
    "ci_halfwidth",
    "error",
];

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt<T>(v: Option<T>, f: impl FnOnce(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

fn row(r: &SweepRecord) -> Vec<String> {
    let p = &r.params;
    let res = r.result.as_ref();
    let f = |g: &dyn Fn(&super::PointResult) -> f64| opt(res, |x| float(g(x)));
    let target = res.and_then(|x| x.target);
    let cb = res.and_then(|x| x.codebook);
    let exact = res.and_then(|x| x.exact);
    let bounds = res.and_then(|x| x.bounds);
    let sim = res.and_then(|x| x.simulation.as_ref());
    let counts = sim.map(|s| s.counts);
    let engine = sim.map(|s| match s.engine {
        crate::scheme::Engine::Auto => "auto",
        crate::scheme::Engine::Correlation => "correlation",
        crate::scheme::Engine::Sparse => "sparse",
    });
    let mut cells = vec![
        r.point.to_string(),
        opt(r.case, |c| c.to_string()),
        if r.error.is_some() { "error" } else { "ok" }.to_string(),
        float(p.a_sq),
        float(p.b_sq),
        float(p.gamma),
        float(p.b_sq_gamma()),
        float(p.snr_base),
        float(p.t_s),
        float(p.t_d),
        float(p.t_c),
        float(p.theta),
        p.n.to_string(),
        float(p.eps),
        float(p.eps1),
        float(p.eps2),
        f(&|x| x.rho),
        opt(res, |x| x.regime.kind.as_str().to_string()),
        f(&|x| x.rates.min_cut),
        f(&|x| x.rates.cutset_ub),
        f(&|x| x.rates.block_markov_lb),
        opt(res, |x| x.rates.capacity_known.to_string()),
        f(&|x| x.hyperedges.blue),
        f(&|x| x.hyperedges.red),
        f(&|x| x.hyperedges.black),
        f(&|x| x.hyperedges.green),
        f(&|x| x.flows.blue),
        f(&|x| x.flows.red),
        f(&|x| x.flows.black),
        f(&|x| x.flows.green),
        f(&|x| x.chernoff_rate_limit),
        opt(target, |t| {
            match t.reference {
                crate::analysis::RateReference::Chernoff => "chernoff",
                crate::analysis::RateReference::MinCut => "min_cut",
            }
            .to_string()
        }),
        opt(target, |t| float(t.reference_rate)),
        opt(target.and_then(|t| t.rate_fraction), float),
        opt(target, |t| float(t.rate_target)),
        opt(cb, |c| c.m_r.to_string()),
        opt(cb, |c| c.m_d.to_string()),
        opt(cb, |c| c.m_s().to_string()),
        opt(res.and_then(|x| x.r1), float),
        opt(res.and_then(|x| x.r2), float),
        opt(res.and_then(|x| Some(x.r1? + x.r2?)), float),
        f(&|x| x.thresholds.a_r),
        f(&|x| x.thresholds.b_r),
        f(&|x| x.thresholds.b_s),
    ];
    cells.extend(
        [
            exact.map(|e| e.p_e_total),
            exact.map(|e| e.p_e11),
            exact.map(|e| e.p_e12),
            exact.map(|e| e.p_e2),
            exact.map(|e| e.p_tag_e11),
            exact.map(|e| e.p_tag_e12),
            exact.map(|e| e.p_tag_e2),
            bounds.map(|b| b.e11.bound),
            bounds.map(|b| b.e12.bound),
            bounds.map(|b| b.e2.bound),
            bounds.map(|b| b.total),
        ]
        .into_iter()
        .map(|v| opt(v, float)),
    );
    cells.push(opt(bounds, |b| b.clamped.to_string()));
    cells.push(opt(engine, |e| e.to_string()));
    cells.push(opt(sim, |s| s.seed.to_string()));
    cells.extend(
        [
            counts.map(|c| c.trials),
            counts.map(|c| c.none),
            counts.map(|c| c.e11),
            counts.map(|c| c.e12),
            counts.map(|c| c.e2),
            counts.map(|c| c.relay_ok),
            counts.map(|c| c.bin_ok_given_relay_ok),
            counts.map(|c| c.bin_ok),
        ]
        .into_iter()
        .map(|v| opt(v, |x| x.to_string())),
    );
    cells.extend(
        [sim.map(|s| s.p_e_hat), sim.map(|s| s.ci_low), sim.map(|s| s.ci_high), sim.map(|s| s.ci_halfwidth)]
            .into_iter()
            .map(|v| opt(v, float)),
    );
    cells.push(r.error.clone().unwrap_or_default());
    debug_assert_eq!(cells.len(), CSV_COLUMNS.len());
    cells
}

pub fn write_csv<W: Write>(records: &[SweepRecord], out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in records {
        w.write_record(row(r))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct JsonLine {
    schema_version: u32,
    #[serde(flatten)]
    record: SweepRecord,
}

pub fn write_jsonl<W: Write>(records: &[SweepRecord], mut out: W) -> std::io::Result<()> {
    for r in records {
        let line = JsonLine { schema_version: SCHEMA_VERSION, record: r.clone() };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Writes `records` to `path`, creating or truncating it.
pub fn emit(records: &[SweepRecord], format: OutputFormat, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let out = BufWriter::new(file);
    match format {
        OutputFormat::Csv => write_csv(records, out).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Serialization(format!("{}: {other:?}", path.display())),
        }),
        OutputFormat::Jsonl => write_jsonl(records, out).map_err(|e| Error::io(path, e)),
    }
}

/// Reads records written by [`write_jsonl`].
pub fn read_jsonl(path: &Path) -> Result<Vec<SweepRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: JsonLine = serde_json::from_str(&line)
            .map_err(|e| Error::Serialization(format!("{}:{}: {e}", path.display(), i + 1)))?;
        if parsed.schema_version != SCHEMA_VERSION {
            return Err(Error::Serialization(format!(
                "{}:{}: schema_version {} is not {SCHEMA_VERSION}",
                path.display(),
                i + 1,
                parsed.schema_version
            )));
        }
        out.push(parsed.record);
    }
    Ok(out)
}
