//! Per-foot streaming estimator of the stable-contact probability.
//!
//! Every pushed sample enters a sliding window of the last `d` samples. For
//! each axis the window is turned into a KDE with the axis sigma as bandwidth,
//! its mass on `[-δ, δ]` is taken as the probability that the true value is
//! zero on that axis, and the six axis probabilities are multiplied.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kde::{self, Kde1d};
use crate::normal;
use crate::types::{Axes, ContactEstimate, DeltaThresholds, FootId, ImuSample, NoiseModel};
use crate::window::SampleWindow;

pub const DEFAULT_WINDOW: usize = 50;
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub window_size: usize,
    pub noise: NoiseModel,
    pub delta: DeltaThresholds,
    /// Declared sensor rate, used only to sanity-check `window_size`.
    pub sample_rate_hz: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        let noise = NoiseModel::nominal();
        Self {
            window_size: DEFAULT_WINDOW,
            noise,
            delta: DeltaThresholds::default_for(&noise),
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
        }
    }
}

impl EstimatorConfig {
    pub fn with_noise(noise: NoiseModel) -> Self {
        Self {
            noise,
            delta: DeltaThresholds::default_for(&noise),
            ..Self::default()
        }
    }

    /// Checks hard invariants and returns soft warnings.
    ///
    /// The window should be about an order of magnitude shorter than the
    /// sensor rate; exceeding `sample_rate_hz / 10` is reported, not rejected.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.window_size < 2 {
            return Err(invalid(
                "window_size",
                format!("must be at least 2, got {}", self.window_size),
            ));
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(invalid(
                "sample_rate_hz",
                format!("must be finite and > 0, got {}", self.sample_rate_hz),
            ));
        }
        NoiseModel::new(*self.noise.sigma())?;
        DeltaThresholds::new(*self.delta.delta())?;
        let mut warnings = Vec::new();
        let limit = self.sample_rate_hz / 10.0;
        if self.window_size as f64 > limit {
            warnings.push(format!(
                "window_size {} exceeds sample_rate_hz / 10 = {limit}",
                self.window_size
            ));
        }
        Ok(warnings)
    }
}

#[derive(Debug, Clone)]
pub struct FootEstimator {
    config: EstimatorConfig,
    window: SampleWindow,
    // Interval mass of each buffered sample, per axis; moves in lockstep with `window`.
    masses: VecDeque<Axes>,
    foot: Option<FootId>,
    last_t: Option<f64>,
}

impl FootEstimator {
    pub fn new(config: EstimatorConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            window: SampleWindow::new(config.window_size)?,
            masses: VecDeque::with_capacity(config.window_size),
            config,
            foot: None,
            last_t: None,
        })
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.config
    }

    pub fn window(&self) -> &SampleWindow {
        &self.window
    }

    pub fn foot(&self) -> Option<FootId> {
        self.foot
    }

    pub fn is_warm(&self) -> bool {
        self.window.is_full()
    }

    pub fn reset(&mut self) {
        self.window.clear();
        self.masses.clear();
        self.foot = None;
        self.last_t = None;
    }

    /// Pushes one preprocessed sample. Returns `None` until the window holds two samples.
    pub fn step(&mut self, sample: &ImuSample) -> Result<Option<ContactEstimate>> {
        sample.validate()?;
        if let Some(expected) = self.foot {
            if expected != sample.foot {
                return Err(Error::MixedFeet {
                    expected,
                    got: sample.foot,
                });
            }
        }
        if let Some(prev) = self.last_t {
            if sample.t <= prev {
                return Err(Error::NonIncreasingTime { prev, got: sample.t });
            }
        }

        let v = sample.axes();
        let sigma = self.config.noise.sigma();
        let delta = self.config.delta.delta();
        let mass: Axes = std::array::from_fn(|k| normal::kernel_interval_mass(v[k], sigma[k], delta[k]));
        if self.window.push(v)?.is_some() {
            self.masses.pop_front();
        }
        self.masses.push_back(mass);
        self.foot = Some(sample.foot);
        self.last_t = Some(sample.t);

        if self.window.fill() < 2 {
            return Ok(None);
        }
        let axis_probs: Axes =
            std::array::from_fn(|k| kde::mean_of_masses(self.masses.iter().map(|m| m[k])));
        Ok(Some(ContactEstimate::from_axis_probs(
            sample.t,
            sample.foot,
            axis_probs,
            self.is_warm(),
        )))
    }

    /// Axis probabilities recomputed from scratch through [`Kde1d`] on the current window.
    pub fn axis_probs_direct(&self) -> Result<Axes> {
        let sigma = self.config.noise.sigma();
        let delta = self.config.delta.delta();
        let mut probs = [0.0; 6];
        for (k, p) in probs.iter_mut().enumerate() {
            let kde = Kde1d::from_axis(&self.window.axis(k)?, sigma[k])?;
            *p = kde.interval_prob(delta[k])?;
        }
        Ok(probs)
    }
}

/// Runs a fresh estimator over a time-ordered single-foot series.
/// Yields one estimate per sample from the second onward.
pub fn estimate_series(config: &EstimatorConfig, samples: &[ImuSample]) -> Result<Vec<ContactEstimate>> {
    if let Some(first) = samples.first() {
        if let Some(other) = samples.iter().find(|s| s.foot != first.foot) {
            return Err(Error::MixedFeet {
                expected: first.foot,
                got: other.foot,
            });
        }
    }
    let mut est = FootEstimator::new(*config)?;
    let mut out = Vec::with_capacity(samples.len().saturating_sub(1));
    for s in samples {
        if let Some(e) = est.step(s)? {
            out.push(e);
        }
    }
    Ok(out)
}
