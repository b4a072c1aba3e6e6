//! Force-side ground truth and the force-threshold baseline.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::types::{check_finite, FootId};

pub const DEFAULT_VEL_EPS: f64 = 1e-3;
pub const DEFAULT_FZ_EPS: f64 = 1.0;

/// Ground reaction force on one foot. `f[2]` is the normal component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceSample {
    pub t: f64,
    pub f: [f64; 3],
    pub foot: FootId,
}

impl ForceSample {
    pub fn new(t: f64, f: [f64; 3], foot: FootId) -> Result<Self> {
        check_finite(&f)?;
        if !t.is_finite() {
            return Err(invalid("t", "must be finite"));
        }
        Ok(Self { t, f, foot })
    }

    pub fn tangential(&self) -> f64 {
        self.f[0].hypot(self.f[1])
    }

    pub fn normal(&self) -> f64 {
        self.f[2]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrictionModel {
    pub mu_s: f64,
    pub mu_k: f64,
}

impl FrictionModel {
    pub fn new(mu_s: f64, mu_k: f64) -> Result<Self> {
        let model = Self { mu_s, mu_k };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu_k > 0.0 && self.mu_k <= self.mu_s && self.mu_s.is_finite()) {
            return Err(invalid(
                "friction",
                format!("need 0 < mu_k <= mu_s, got mu_s = {}, mu_k = {}", self.mu_s, self.mu_k),
            ));
        }
        Ok(())
    }

    /// Largest tangential load the contact holds before sliding.
    pub fn static_limit(&self, fz: f64) -> f64 {
        self.mu_s * fz
    }

    /// Resistance while sliding.
    pub fn kinetic_force(&self, fz: f64) -> f64 {
        self.mu_k * fz
    }
}

/// Dry-friction stability: the tangential load lies inside the static cone of a loaded contact.
pub fn coulomb_stable(f: &ForceSample, mu_s: f64) -> bool {
    let fz = f.normal();
    fz > 0.0 && f.tangential() <= mu_s * fz
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruthLabel {
    pub t: f64,
    pub foot: FootId,
    pub stable: bool,
    pub in_contact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelerParams {
    /// Largest sole speed (m/s) and angular speed (rad/s) still counted as zero.
    pub vel_eps: f64,
    /// Smallest normal force (N) counted as contact.
    pub fz_eps: f64,
}

impl Default for LabelerParams {
    fn default() -> Self {
        Self {
            vel_eps: DEFAULT_VEL_EPS,
            fz_eps: DEFAULT_FZ_EPS,
        }
    }
}

fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Labels each instant: in contact when `F_z > fz_eps`; stable when also both
/// the sole velocity and angular velocity norms are within `vel_eps`.
pub fn label_trace(
    forces: &[ForceSample],
    velocities: &[[f64; 3]],
    angular: &[[f64; 3]],
    params: &LabelerParams,
) -> Result<Vec<GroundTruthLabel>> {
    for len in [velocities.len(), angular.len()] {
        if len != forces.len() {
            return Err(Error::LengthMismatch {
                expected: forces.len(),
                got: len,
            });
        }
    }
    Ok(forces
        .iter()
        .zip(velocities)
        .zip(angular)
        .map(|((f, v), w)| {
            let in_contact = f.normal() > params.fz_eps;
            let still = norm3(v) <= params.vel_eps && norm3(w) <= params.vel_eps;
            GroundTruthLabel {
                t: f.t,
                foot: f.foot,
                stable: in_contact && still,
                in_contact,
            }
        })
        .collect())
}

/// Thresholds of the two-level hysteresis contact detector on `F_z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchmittParams {
    pub high: f64,
    pub low: f64,
}

impl Default for SchmittParams {
    fn default() -> Self {
        Self { high: 250.0, low: 100.0 }
    }
}

impl SchmittParams {
    pub fn validate(&self) -> Result<()> {
        if self.low.is_nan() || self.high.is_nan() || self.low >= self.high {
            return Err(invalid(
                "baseline",
                format!("low ({}) must be below high ({})", self.low, self.high),
            ));
        }
        Ok(())
    }
}

/// Contact flag with hysteresis: switches on above `high`, off below `low`, holds in between.
pub fn schmitt_contact(fz: &[f64], params: &SchmittParams, initial: bool) -> Result<Vec<bool>> {
    params.validate()?;
    let mut state = initial;
    Ok(fz
        .iter()
        .map(|&f| {
            if f > params.high {
                state = true;
            } else if f < params.low {
                state = false;
            }
            state
        })
        .collect())
}
