//! Run configuration: a TOML file whose values may be overridden by environment
//! variables named `STABLE_CONTACT_<SECTION>__<KEY>`, e.g.
//! `STABLE_CONTACT_ESTIMATOR__WINDOW_SIZE=30`. Override values are parsed as
//! TOML (`0.5`, `true`, `[1, 2, 3]`) and fall back to plain strings.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stable_contact::contactmodel::{LabelerParams, SchmittParams, DEFAULT_FZ_EPS, DEFAULT_VEL_EPS};
use stable_contact::estimator::{DEFAULT_SAMPLE_RATE_HZ, DEFAULT_WINDOW};
use stable_contact::eval::{CompareOptions, DEFAULT_THRESHOLD};
use stable_contact::preprocess::{DEFAULT_FILTER_GAIN, DEFAULT_MAX_DT, MIN_CALIBRATION_SAMPLES, STANDARD_GRAVITY};
use stable_contact::{Axes, ComplementaryFilter, DeltaThresholds, EstimatorConfig, GravityModel, NoiseModel};

use crate::error::CliError;

pub const ENV_PREFIX: &str = "STABLE_CONTACT_";
pub const DEFAULT_CALIBRATION_SAMPLES: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorSection {
    pub window_size: usize,
    /// Per-axis noise sigma; also the KDE bandwidth.
    pub sigma: Option<Axes>,
    /// Per-axis half-width of the stillness interval.
    pub delta: Option<Axes>,
    /// Alternative to `delta`: half-width as a multiple of `sigma`.
    pub delta_sigma_multiple: Option<f64>,
    pub sample_rate_hz: f64,
}

impl Default for EstimatorSection {
    fn default() -> Self {
        Self {
            window_size: DEFAULT_WINDOW,
            sigma: None,
            delta: None,
            delta_sigma_multiple: None,
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessSection {
    /// Skip calibration and compensation. Unset: taken from the trace sidecar if
    /// present, otherwise preprocessing runs.
    pub bypass: Option<bool>,
    pub filter_gain: f64,
    pub gravity: [f64; 3],
    /// Leading samples per foot assumed still, used for bias and attitude calibration.
    pub calibration_samples: usize,
    pub max_dt: f64,
}

impl Default for PreprocessSection {
    fn default() -> Self {
        Self {
            bypass: None,
            filter_gain: DEFAULT_FILTER_GAIN,
            gravity: [0.0, 0.0, -STANDARD_GRAVITY],
            calibration_samples: DEFAULT_CALIBRATION_SAMPLES,
            max_dt: DEFAULT_MAX_DT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelerSection {
    pub vel_eps: f64,
    pub fz_eps: f64,
}

impl Default for LabelerSection {
    fn default() -> Self {
        Self {
            vel_eps: DEFAULT_VEL_EPS,
            fz_eps: DEFAULT_FZ_EPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineSection {
    pub high: f64,
    pub low: f64,
}

impl Default for BaselineSection {
    fn default() -> Self {
        let d = SchmittParams::default();
        Self { high: d.high, low: d.low }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub threshold: f64,
    pub include_warmup: bool,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            include_warmup: false,
        }
    }
}

/// Default paths used when the matching command-line flag is absent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub estimates: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub estimator: EstimatorSection,
    pub preprocess: PreprocessSection,
    pub labeler: LabelerSection,
    pub baseline: BaselineSection,
    pub eval: EvalSection,
    pub output: OutputSection,
}

fn keyed(key: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("config key `{key}`: {e}"))
}

impl RunConfig {
    /// Reads `path` (if any) and applies overrides from `env`.
    pub fn load<I>(path: Option<&Path>, env: I) -> Result<Self, CliError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Data(format!("cannot read config {}: {e}", p.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| CliError::Data(format!("config {}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        apply_env(&mut table, env)?;
        let config: RunConfig = table
            .try_into()
            .map_err(|e| CliError::Data(format!("config: {e}")))?;
        config.estimator_config()?;
        config.filter()?;
        config.schmitt()?;
        if !(0.0..=1.0).contains(&config.eval.threshold) {
            return Err(keyed("eval.threshold", "must lie in [0, 1]"));
        }
        if !(config.labeler.vel_eps >= 0.0 && config.labeler.fz_eps >= 0.0) {
            return Err(keyed("labeler", "vel_eps and fz_eps must be >= 0"));
        }
        Ok(config)
    }

    pub fn from_env(path: Option<&Path>) -> Result<Self, CliError> {
        Self::load(path, std::env::vars())
    }

    pub fn estimator_config(&self) -> Result<EstimatorConfig, CliError> {
        let e = &self.estimator;
        let noise = match e.sigma {
            Some(s) => NoiseModel::new(s).map_err(|err| keyed("estimator.sigma", err))?,
            None => NoiseModel::nominal(),
        };
        let delta = match (e.delta, e.delta_sigma_multiple) {
            (Some(_), Some(_)) => {
                return Err(keyed(
                    "estimator.delta",
                    "set either delta or delta_sigma_multiple, not both",
                ))
            }
            (Some(d), None) => DeltaThresholds::new(d).map_err(|err| keyed("estimator.delta", err))?,
            (None, Some(k)) => DeltaThresholds::sigma_multiple(&noise, k)
                .map_err(|err| keyed("estimator.delta_sigma_multiple", err))?,
            (None, None) => DeltaThresholds::default_for(&noise),
        };
        let config = EstimatorConfig {
            window_size: e.window_size,
            noise,
            delta,
            sample_rate_hz: e.sample_rate_hz,
        };
        config.validate().map_err(|err| match err {
            stable_contact::Error::InvalidParameter { name, reason } => keyed(&format!("estimator.{name}"), reason),
            other => keyed("estimator", other),
        })?;
        Ok(config)
    }

    /// Soft warnings about the estimator settings.
    pub fn warnings(&self) -> Vec<String> {
        self.estimator_config()
            .ok()
            .and_then(|c| c.validate().ok())
            .unwrap_or_default()
    }

    pub fn filter(&self) -> Result<ComplementaryFilter, CliError> {
        let p = &self.preprocess;
        let gravity = GravityModel::new(p.gravity).map_err(|e| keyed("preprocess.gravity", e))?;
        let mut filter = ComplementaryFilter::new(p.filter_gain, gravity).map_err(|e| keyed("preprocess.filter_gain", e))?;
        filter.max_dt = p.max_dt;
        filter.validate().map_err(|e| keyed("preprocess.max_dt", e))?;
        if p.calibration_samples < MIN_CALIBRATION_SAMPLES {
            return Err(keyed(
                "preprocess.calibration_samples",
                format!("must be at least {MIN_CALIBRATION_SAMPLES}"),
            ));
        }
        Ok(filter)
    }

    pub fn schmitt(&self) -> Result<SchmittParams, CliError> {
        let s = SchmittParams {
            high: self.baseline.high,
            low: self.baseline.low,
        };
        s.validate().map_err(|e| keyed("baseline", e))?;
        Ok(s)
    }

    pub fn labeler_params(&self) -> LabelerParams {
        LabelerParams {
            vel_eps: self.labeler.vel_eps,
            fz_eps: self.labeler.fz_eps,
        }
    }

    pub fn compare_options(&self) -> CompareOptions {
        CompareOptions {
            threshold: self.eval.threshold,
            include_warmup: self.eval.include_warmup,
            ..CompareOptions::default()
        }
    }
}

fn apply_env<I>(table: &mut toml::Table, env: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = (String, String)>,
{
    for (name, raw) in env {
        let Some(rest) = name.strip_prefix(ENV_PREFIX) else {
            continue;
        };
        let Some((section, key)) = rest.split_once("__") else {
            return Err(CliError::Data(format!(
                "environment variable {name}: expected {ENV_PREFIX}<SECTION>__<KEY>"
            )));
        };
        let value = format!("v = {raw}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.clone()));
        let entry = table
            .entry(section.to_ascii_lowercase())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        match entry {
            toml::Value::Table(t) => {
                t.insert(key.to_ascii_lowercase(), value);
            }
            _ => {
                return Err(CliError::Data(format!(
                    "environment variable {name}: config key `{}` is not a section",
                    section.to_ascii_lowercase()
                )))
            }
        }
    }
    Ok(())
}
