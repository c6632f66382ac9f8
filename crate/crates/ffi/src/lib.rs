//! C ABI for the wbrelay library.
//!
//! Configurations live behind an opaque [`WbrConfig`] handle built from JSON
//! text. Every fallible call returns a [`WbrStatus`]; on failure the message
//! is available from [`wbr_last_error`] on the same thread. Panics are caught
//! at the boundary and reported as `WBR_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use wbrelay::analysis::{self, RegimeKind};
use wbrelay::harness::{self, ExperimentConfig, OutputFormat};
use wbrelay::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WbrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    InvalidParams = 4,
    Domain = 5,
    Planning = 6,
    Resource = 7,
    Io = 8,
    Serialization = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum WbrRegime {
    #[default]
    Direct = 0,
    RelayLimitedBySr = 1,
    RelayLimitedByMaCut = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WbrFormat {
    Csv = 0,
    Jsonl = 1,
}

/// Opaque experiment configuration.
pub struct WbrConfig {
    inner: ExperimentConfig,
}

/// Wideband rates in nats/s and the regime of a configuration.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WbrRates {
    pub min_cut: f64,
    pub cutset_ub: f64,
    pub block_markov_lb: f64,
    pub capacity_known: bool,
    pub regime: WbrRegime,
    pub r1: f64,
    pub r2: f64,
    pub edge_blue: f64,
    pub edge_red: f64,
    pub edge_black: f64,
    pub edge_green: f64,
    pub flow_blue: f64,
    pub flow_red: f64,
    pub flow_black: f64,
    pub flow_green: f64,
    pub chernoff_rate_limit: f64,
    pub rho: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WbrTails {
    pub below: f64,
    pub above: f64,
    pub ln_above: f64,
}

/// Exact error probabilities and Chernoff bounds of a configuration.
/// `p_e11`, `p_e12` and `p_e2` are per-stage error events; the `p_tag_*`
/// fields partition `p_e_total` by first failing stage.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WbrExactReport {
    pub m_r: u64,
    pub m_d: u64,
    pub p_e11: f64,
    pub p_e12: f64,
    pub p_e2: f64,
    pub p_bin_error: f64,
    pub p_e_total: f64,
    pub p_tag_e11: f64,
    pub p_tag_e12: f64,
    pub p_tag_e2: f64,
    pub bound_e11: f64,
    pub bound_e12: f64,
    pub bound_e2: f64,
    pub bound_total: f64,
    pub bound_clamped: bool,
}

/// Monte Carlo batch summary.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WbrBatchSummary {
    pub trials: u64,
    pub count_none: u64,
    pub count_e11: u64,
    pub count_e12: u64,
    pub count_e2: u64,
    pub relay_ok: u64,
    pub bin_ok_given_relay_ok: u64,
    pub bin_ok: u64,
    pub p_e_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub exact_p_e: f64,
    pub bound_total: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(WbrStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Domain(_) => WbrStatus::Domain,
            Error::InvalidParams(_) => WbrStatus::InvalidParams,
            Error::Planning(_) => WbrStatus::Planning,
            Error::Resource(_) => WbrStatus::Resource,
            Error::Config(_) => WbrStatus::InvalidConfig,
            Error::Io { .. } => WbrStatus::Io,
            Error::Serialization(_) => WbrStatus::Serialization,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(WbrStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f` behind the panic and error boundary.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> WbrStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WbrStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("panic: {msg}"));
            WbrStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(WbrStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn config_arg<'a>(p: *const WbrConfig) -> Result<&'a ExperimentConfig, Failure> {
    p.as_ref().map(|c| &c.inner).ok_or_else(|| null("config"))
}

unsafe fn out_arg<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null("output pointer"))
}

fn boxed(inner: ExperimentConfig) -> *mut WbrConfig {
    Box::into_raw(Box::new(WbrConfig { inner }))
}

/// Parses a JSON configuration into a new handle stored in `*out`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wbr_config_from_json(json: *const c_char, out: *mut *mut WbrConfig) -> WbrStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let cfg = ExperimentConfig::from_json_str(str_arg(json, "json")?)?;
        cfg.validate()?;
        *out = boxed(cfg);
        Ok(())
    })
}

/// Loads a bundled preset (`example`, `fig3`, `n-scaling`, `oracle-grid`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wbr_config_from_preset(name: *const c_char, out: *mut *mut WbrConfig) -> WbrStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let name = str_arg(name, "name")?;
        let text = harness::preset(name)
            .ok_or_else(|| Failure(WbrStatus::InvalidConfig, format!("unknown preset {name:?}")))?;
        *out = boxed(ExperimentConfig::from_json_str(text)?);
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `config` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wbr_config_free(config: *mut WbrConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Sets a dotted key, e.g. `params.a_sq`, to a JSON value or bare string.
/// The handle is unchanged on failure.
///
/// # Safety
/// Pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn wbr_config_set(config: *mut WbrConfig, key: *const c_char, value: *const c_char) -> WbrStatus {
    guard(|| {
        let cfg = config.as_mut().ok_or_else(|| null("config"))?;
        let key = str_arg(key, "key")?;
        let value = harness::parse_override_value(str_arg(value, "value")?);
        let updated = cfg.inner.with_overrides([(key, value)])?;
        updated.validate()?;
        cfg.inner = updated;
        Ok(())
    })
}

/// Serializes the configuration to JSON; free the result with
/// [`wbr_string_free`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn wbr_config_to_json(config: *const WbrConfig, out: *mut *mut c_char) -> WbrStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let text = serde_json::to_string(config_arg(config)?).map_err(|e| Failure(WbrStatus::Serialization, e.to_string()))?;
        *out = CString::new(text).map_err(|e| Failure(WbrStatus::Serialization, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wbr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Wideband rate bounds, regime and hyperedge capacities.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn wbr_rates(config: *const WbrConfig, out: *mut WbrRates) -> WbrStatus {
    guard(|| {
        let cfg = config_arg(config)?;
        let out = out_arg(out)?;
        let p = &cfg.params;
        p.validate()?;
        let r = analysis::rate_report(p);
        let regime = analysis::classify_regime(p);
        let h = analysis::hyperedges(p);
        let f = analysis::hyperedge_flows(p);
        *out = WbrRates {
            min_cut: r.min_cut,
            cutset_ub: r.cutset_ub,
            block_markov_lb: r.block_markov_lb,
            capacity_known: r.capacity_known,
            regime: match regime.kind {
                RegimeKind::Direct => WbrRegime::Direct,
                RegimeKind::RelayLimitedBySR => WbrRegime::RelayLimitedBySr,
                RegimeKind::RelayLimitedByMACut => WbrRegime::RelayLimitedByMaCut,
            },
            r1: regime.r1,
            r2: regime.r2,
            edge_blue: h.blue,
            edge_red: h.red,
            edge_black: h.black,
            edge_green: h.green,
            flow_blue: f.blue,
            flow_red: f.red,
            flow_black: f.black,
            flow_green: f.green,
            chernoff_rate_limit: analysis::chernoff_rate_limit(p),
            rho: p.peak_snr().value(),
        };
        Ok(())
    })
}

/// Tails of the mean of `n` i.i.d. exponentials of mean `sigma_sq` around
/// `threshold`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn wbr_exact_tails(n: u32, threshold: f64, sigma_sq: f64, out: *mut WbrTails) -> WbrStatus {
    guard(|| {
        let out = out_arg(out)?;
        let t = analysis::exact_tails(n, threshold, sigma_sq)?;
        *out = WbrTails { below: t.below, above: t.above, ln_above: t.ln_above };
        Ok(())
    })
}

/// Exact error probabilities and Chernoff bounds. The configuration needs a
/// codebook or a rate target.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn wbr_exact_error(config: *const WbrConfig, out: *mut WbrExactReport) -> WbrStatus {
    guard(|| {
        let cfg = ExperimentConfig { simulate: false, sweep: None, ..config_arg(config)?.clone() };
        let out = out_arg(out)?;
        let r = harness::evaluate(&cfg)?;
        let (Some(cb), Some(e), Some(b)) = (r.codebook, r.exact, r.bounds) else {
            return Err(Failure(WbrStatus::InvalidConfig, "configuration has no codebook or rate target".into()));
        };
        *out = WbrExactReport {
            m_r: cb.m_r,
            m_d: cb.m_d,
            p_e11: e.p_e11,
            p_e12: e.p_e12,
            p_e2: e.p_e2,
            p_bin_error: e.p_bin_error,
            p_e_total: e.p_e_total,
            p_tag_e11: e.p_tag_e11,
            p_tag_e12: e.p_tag_e12,
            p_tag_e2: e.p_tag_e2,
            bound_e11: b.e11.bound,
            bound_e12: b.e12.bound,
            bound_e2: b.e2.bound,
            bound_total: b.total,
            bound_clamped: b.clamped,
        };
        Ok(())
    })
}

/// Runs the configured Monte Carlo batch.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn wbr_run_batch(config: *const WbrConfig, out: *mut WbrBatchSummary) -> WbrStatus {
    guard(|| {
        let cfg = config_arg(config)?;
        let out = out_arg(out)?;
        let r = harness::run_batch(cfg)?;
        let (s, c) = (&r.simulation, r.simulation.counts);
        *out = WbrBatchSummary {
            trials: c.trials,
            count_none: c.none,
            count_e11: c.e11,
            count_e12: c.e12,
            count_e2: c.e2,
            relay_ok: c.relay_ok,
            bin_ok_given_relay_ok: c.bin_ok_given_relay_ok,
            bin_ok: c.bin_ok,
            p_e_hat: s.p_e_hat,
            ci_low: s.ci_low,
            ci_high: s.ci_high,
            exact_p_e: r.exact.p_e_total,
            bound_total: r.bounds.total,
        };
        Ok(())
    })
}

/// Runs the sweep section and writes the records to `path`. Point counts go
/// to `points_out` and `failed_out` when they are non-null.
///
/// # Safety
/// `config` and `path` must be valid; the count pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn wbr_sweep_to_file(
    config: *const WbrConfig,
    path: *const c_char,
    format: WbrFormat,
    points_out: *mut usize,
    failed_out: *mut usize,
) -> WbrStatus {
    guard(|| {
        let cfg = config_arg(config)?;
        let path = str_arg(path, "path")?;
        let records = harness::sweep(cfg)?;
        let format = match format {
            WbrFormat::Csv => OutputFormat::Csv,
            WbrFormat::Jsonl => OutputFormat::Jsonl,
        };
        harness::emit(&records, format, Path::new(path))?;
        if let Some(p) = points_out.as_mut() {
            *p = records.len();
        }
        if let Some(f) = failed_out.as_mut() {
            *f = records.iter().filter(|r| r.error.is_some()).count();
        }
        Ok(())
    })
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn wbr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wbr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
