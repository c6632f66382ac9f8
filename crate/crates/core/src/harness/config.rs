//! Experiment configuration: JSON files with dotted-key overrides.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::analysis::{RateReference, DEFAULT_MAX_CODEBOOK};
use crate::binning::CodebookParams;
use crate::channel::{GainModel, SystemParams};
use crate::error::{Error, Result};
use crate::scheme::Engine;

fn default_trials() -> u64 {
    1000
}

fn default_max_codebook() -> u64 {
    DEFAULT_MAX_CODEBOOK
}

fn default_true() -> bool {
    true
}

/// One experiment. Either `codebook` fixes the message counts or `target`
/// asks the planner for them; with neither, only rates are evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Free-form annotation, ignored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default)]
    pub params: SystemParams,
    #[serde(default)]
    pub codebook: Option<CodebookParams>,
    #[serde(default)]
    pub target: Option<RateTarget>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default)]
    pub gain_model: GainModel,
    #[serde(default = "default_max_codebook")]
    pub max_codebook: u64,
    /// Run Monte Carlo trials; when false only analysis columns are filled.
    #[serde(default = "default_true")]
    pub simulate: bool,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            description: None,
            params: SystemParams::default(),
            codebook: None,
            target: None,
            trials: default_trials(),
            seed: 0,
            engine: Engine::Auto,
            gain_model: GainModel::Rayleigh,
            max_codebook: default_max_codebook(),
            simulate: true,
            sweep: None,
        }
    }
}

/// Source rate for the planner: an absolute rate in nats/s or a fraction
/// of a reference rate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateTarget {
    #[serde(default)]
    pub rate: Option<f64>,
    #[serde(default)]
    pub rate_fraction: Option<f64>,
    #[serde(default)]
    pub reference: RateReference,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Axes of the Cartesian product, first axis slowest.
    #[serde(default)]
    pub axes: Vec<Axis>,
    /// Named configuration variants as dotted-key overrides; each case is
    /// crossed with every axis point.
    #[serde(default)]
    pub cases: Vec<Map<String, Value>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: SweepParam,
    pub values: AxisValues,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    ASq,
    /// Sets `b_sq` to `value / gamma`.
    BSqGamma,
    Theta,
    N,
    SnrBase,
    /// Sets `target.rate_fraction`, creating a target if needed.
    RateFraction,
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::ASq => "a_sq",
            SweepParam::BSqGamma => "b_sq_gamma",
            SweepParam::Theta => "theta",
            SweepParam::N => "n",
            SweepParam::SnrBase => "snr_base",
            SweepParam::RateFraction => "rate_fraction",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisValues {
    List(Vec<f64>),
    Range(AxisRange),
}

/// Inclusive arithmetic range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl AxisValues {
    pub fn expand(&self) -> Result<Vec<f64>> {
        let values = match self {
            AxisValues::List(v) => v.clone(),
            AxisValues::Range(AxisRange { start, stop, step }) => {
                if !(step.is_finite() && *step > 0.0 && start.is_finite() && stop.is_finite() && stop >= start) {
                    return Err(Error::Config(format!(
                        "axis range needs finite start <= stop and step > 0, got {start}..{stop} by {step}"
                    )));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                if count > 1_000_000 {
                    return Err(Error::Config(format!("axis range has {count} points")));
                }
                (0..count).map(|k| start + k as f64 * step).collect()
            }
        };
        if values.is_empty() {
            return Err(Error::Config("sweep axis has no values".into()));
        }
        Ok(values)
    }
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))
    }

    /// Loads a JSON config and applies `key=value` overrides in order.
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_with_overrides(&text, &path.display().to_string(), overrides)
    }

    /// Parses JSON text, naming `origin` in errors, and applies overrides.
    pub fn parse_with_overrides(text: &str, origin: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut value: Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("{origin}: {e}")))?;
        for (k, v) in overrides {
            set_dotted(&mut value, k, parse_override_value(v))?;
        }
        serde_json::from_value(value).map_err(|e| Error::Config(format!("{origin}: {e}")))
    }

    /// Returns a copy with dotted-key overrides applied. Unknown keys are
    /// rejected by the typed re-parse.
    pub fn with_overrides<'a, I>(&self, overrides: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, Value)>,
    {
        let mut value = serde_json::to_value(self).map_err(|e| Error::Serialization(e.to_string()))?;
        for (k, v) in overrides {
            set_dotted(&mut value, k, v)?;
        }
        Self::from_value(value)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if let Some(cb) = &self.codebook {
            cb.validate()?;
        }
        if let Some(t) = &self.target {
            if self.codebook.is_some() {
                return Err(Error::Config("set either codebook or target, not both".into()));
            }
            match (t.rate, t.rate_fraction) {
                (Some(r), None) if r > 0.0 && r.is_finite() => {}
                (None, Some(f)) if f > 0.0 && f.is_finite() => {}
                _ => {
                    return Err(Error::Config(
                        "target needs exactly one of a positive rate or rate_fraction".into(),
                    ))
                }
            }
        }
        if self.simulate && self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.max_codebook == 0 {
            return Err(Error::Config("max_codebook must be at least 1".into()));
        }
        if let GainModel::PathSum { paths: 0 } = self.gain_model {
            return Err(Error::Config("path_sum gain model needs at least one path".into()));
        }
        Ok(())
    }

    /// Sets one sweep coordinate.
    pub fn set_axis(&mut self, param: SweepParam, value: f64) -> Result<()> {
        let p = &mut self.params;
        match param {
            SweepParam::ASq => p.a_sq = value,
            SweepParam::BSqGamma => {
                if !(p.gamma > 0.0) {
                    return Err(Error::Config("b_sq_gamma axis needs gamma > 0".into()));
                }
                p.b_sq = value / p.gamma;
            }
            SweepParam::Theta => p.theta = value,
            SweepParam::SnrBase => p.snr_base = value,
            SweepParam::N => {
                if !(value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64) {
                    return Err(Error::Config(format!("n axis value {value} is not a positive integer")));
                }
                p.n = value as u32;
            }
            SweepParam::RateFraction => {
                let t = self.target.get_or_insert_with(RateTarget::default);
                t.rate = None;
                t.rate_fraction = Some(value);
            }
        }
        Ok(())
    }
}

/// Parses an override as JSON, falling back to a bare string.
pub fn parse_override_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Splits `key=value`.
pub fn parse_override(arg: &str) -> Result<(String, String)> {
    match arg.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(Error::Config(format!("override {arg:?} is not of the form key=value"))),
    }
}

/// Writes `value` at the dotted path `key`, creating intermediate objects.
pub fn set_dotted(root: &mut Value, key: &str, value: Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("malformed key {key:?}")));
    }
    let mut cur = root;
    for part in &parts[..parts.len() - 1] {
        if cur.is_null() {
            *cur = Value::Object(Map::new());
        }
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("key {key:?}: {part:?} is not an object")))?;
        cur = obj.entry(part.to_string()).or_insert(Value::Null);
    }
    if cur.is_null() {
        *cur = Value::Object(Map::new());
    }
    let obj = cur
        .as_object_mut()
        .ok_or_else(|| Error::Config(format!("key {key:?}: parent is not an object")))?;
    obj.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
