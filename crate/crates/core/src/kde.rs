//! Univariate Gaussian kernel density estimation.
//!
//! The density over samples `m_1..m_n` with bandwidth `h` is
//!
//! ```text
//! f(x) = 1/(n h) Σ K((x - m_i) / h),    K(u) = exp(-u²/2) / √(2π)
//! ```
//!
//! and its mass on `[-δ, δ]` has the closed form
//! `1/n Σ [Φ((δ - m_i)/h) - Φ((-δ - m_i)/h)]`, so no quadrature is needed.

use crate::error::{invalid, Error, Result};
use crate::normal;
use crate::types::check_finite;

#[derive(Debug, Clone, PartialEq)]
pub struct Kde1d {
    samples: Vec<f64>,
    h: f64,
}

impl Kde1d {
    pub fn new(samples: Vec<f64>, h: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty("kde samples"));
        }
        check_finite(&samples).map_err(|e| match e {
            Error::NonFinite { axis, value } => {
                invalid("kde samples", format!("sample {axis} is {value}"))
            }
            other => other,
        })?;
        if !(h.is_finite() && h > 0.0) {
            return Err(invalid("bandwidth", format!("must be finite and > 0, got {h}")));
        }
        Ok(Self { samples, h })
    }

    /// KDE of one axis with the bandwidth set to that axis' sensor sigma.
    pub fn from_axis(values: &[f64], sigma: f64) -> Result<Self> {
        Self::new(values.to_vec(), sigma)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Density at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let h = self.h;
        let sum: f64 = self.samples.iter().map(|&m| normal::kernel((x - m) / h)).sum();
        sum / (self.samples.len() as f64 * h)
    }

    /// Probability mass of the density on `[-delta, delta]`.
    pub fn interval_prob(&self, delta: f64) -> Result<f64> {
        if delta.is_nan() || delta <= 0.0 {
            return Err(invalid("delta", format!("must be > 0, got {delta}")));
        }
        Ok(mean_interval_mass(self.samples.iter().copied(), self.h, delta))
    }
}

/// Averages per-sample kernel masses. Shared with the streaming estimator so
/// both paths sum identical terms in identical order.
pub(crate) fn mean_of_masses<I: ExactSizeIterator<Item = f64>>(masses: I) -> f64 {
    let n = masses.len() as f64;
    let sum: f64 = masses.sum();
    (sum / n).clamp(0.0, 1.0)
}

fn mean_interval_mass<I: ExactSizeIterator<Item = f64>>(samples: I, h: f64, delta: f64) -> f64 {
    mean_of_masses(samples.map(|m| normal::kernel_interval_mass(m, h, delta)))
}
