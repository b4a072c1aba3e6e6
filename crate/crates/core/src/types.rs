//! Value types shared across the pipeline.
//!
//! Six-axis vectors always use the order `(a_x, a_y, a_z, ω_x, ω_y, ω_z)`,
//! indices 0 to 5, in the foot frame.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// One value per IMU axis, in the fixed axis order.
pub type Axes = [f64; 6];

pub const AX: usize = 0;
pub const AY: usize = 1;
pub const AZ: usize = 2;
pub const WX: usize = 3;
pub const WY: usize = 4;
pub const WZ: usize = 5;

pub const AXIS_NAMES: [&str; 6] = ["ax", "ay", "az", "wx", "wy", "wz"];

/// Axes whose joint stillness makes a contact tangentially stable: `a_x`, `a_y`, `ω_z`.
pub const TANGENTIAL_AXES: [usize; 3] = [AX, AY, WZ];
/// Axes whose joint stillness makes a contact rotationally stable: `a_z`, `ω_x`, `ω_y`.
pub const ROTATIONAL_AXES: [usize; 3] = [AZ, WX, WY];

/// Accelerometer noise of the simulated sole IMU, m/s².
pub const NOMINAL_SIGMA_ACCEL: f64 = 0.02467;
/// Gyroscope noise of the simulated sole IMU, rad/s.
pub const NOMINAL_SIGMA_GYRO: f64 = 0.01653;

pub(crate) fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(axis) => Err(Error::NonFinite {
            axis,
            value: values[axis],
        }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FootFamily {
    Biped,
    Quadruped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FootId {
    L,
    R,
    RL,
    RR,
    FL,
    FR,
}

impl FootId {
    pub fn family(self) -> FootFamily {
        match self {
            FootId::L | FootId::R => FootFamily::Biped,
            _ => FootFamily::Quadruped,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FootId::L => "L",
            FootId::R => "R",
            FootId::RL => "RL",
            FootId::RR => "RR",
            FootId::FL => "FL",
            FootId::FR => "FR",
        }
    }

    /// Fails if the feet do not all belong to one family.
    pub fn check_single_family<I: IntoIterator<Item = FootId>>(feet: I) -> Result<()> {
        let mut iter = feet.into_iter();
        let Some(first) = iter.next() else {
            return Ok(());
        };
        for foot in iter {
            if foot.family() != first.family() {
                return Err(Error::MixedFamilies(first, foot));
            }
        }
        Ok(())
    }
}

impl fmt::Display for FootId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FootId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "L" => Ok(FootId::L),
            "R" => Ok(FootId::R),
            "RL" => Ok(FootId::RL),
            "RR" => Ok(FootId::RR),
            "FL" => Ok(FootId::FL),
            "FR" => Ok(FootId::FR),
            other => Err(invalid(
                "foot",
                format!("unknown foot label {other:?} (expected L, R, RL, RR, FL or FR)"),
            )),
        }
    }
}

/// A timestamped six-axis inertial reading for one foot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    /// Seconds.
    pub t: f64,
    /// Linear acceleration, m/s².
    pub a: [f64; 3],
    /// Angular velocity, rad/s.
    pub w: [f64; 3],
    pub foot: FootId,
}

impl ImuSample {
    pub fn new(t: f64, a: [f64; 3], w: [f64; 3], foot: FootId) -> Result<Self> {
        let sample = Self { t, a, w, foot };
        sample.validate()?;
        Ok(sample)
    }

    pub fn from_axes(t: f64, m: Axes, foot: FootId) -> Result<Self> {
        Self::new(t, [m[0], m[1], m[2]], [m[3], m[4], m[5]], foot)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.t.is_finite() || self.t < 0.0 {
            return Err(invalid("t", format!("{} is not a finite non-negative time", self.t)));
        }
        check_finite(&self.axes())
    }

    pub fn axes(&self) -> Axes {
        [self.a[0], self.a[1], self.a[2], self.w[0], self.w[1], self.w[2]]
    }
}

/// Per-axis sensor standard deviations. They double as the KDE bandwidths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Axes", into = "Axes")]
pub struct NoiseModel {
    sigma: Axes,
}

impl NoiseModel {
    pub fn new(sigma: Axes) -> Result<Self> {
        for (axis, &s) in sigma.iter().enumerate() {
            if !(s.is_finite() && s > 0.0) {
                return Err(invalid(
                    "sigma",
                    format!("axis {axis} ({}) must be finite and > 0, got {s}", AXIS_NAMES[axis]),
                ));
            }
        }
        Ok(Self { sigma })
    }

    /// Same sigma on the three accelerometer axes and on the three gyro axes.
    pub fn isotropic(sigma_accel: f64, sigma_gyro: f64) -> Result<Self> {
        Self::new([
            sigma_accel,
            sigma_accel,
            sigma_accel,
            sigma_gyro,
            sigma_gyro,
            sigma_gyro,
        ])
    }

    /// σ_a = 0.02467 m/s², σ_ω = 0.01653 rad/s.
    pub fn nominal() -> Self {
        Self {
            sigma: [
                NOMINAL_SIGMA_ACCEL,
                NOMINAL_SIGMA_ACCEL,
                NOMINAL_SIGMA_ACCEL,
                NOMINAL_SIGMA_GYRO,
                NOMINAL_SIGMA_GYRO,
                NOMINAL_SIGMA_GYRO,
            ],
        }
    }

    pub fn sigma(&self) -> &Axes {
        &self.sigma
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::nominal()
    }
}

/// Half-widths of the per-axis integration intervals `[-δ, δ]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Axes", into = "Axes")]
pub struct DeltaThresholds {
    delta: Axes,
}

impl DeltaThresholds {
    /// Multiplier applied to sigma by [`DeltaThresholds::default_for`].
    ///
    /// A window of pure noise at σ, smoothed by a kernel of bandwidth σ, has a
    /// density of spread σ√2. Three of those standard deviations keep ≈ 99.73 %
    /// of the mass of a still foot inside the interval on every axis.
    pub const DEFAULT_SIGMA_MULTIPLE: f64 = 3.0 * std::f64::consts::SQRT_2;

    pub fn new(delta: Axes) -> Result<Self> {
        for (axis, &d) in delta.iter().enumerate() {
            if !(d.is_finite() && d > 0.0) {
                return Err(invalid(
                    "delta",
                    format!("axis {axis} ({}) must be finite and > 0, got {d}", AXIS_NAMES[axis]),
                ));
            }
        }
        Ok(Self { delta })
    }

    /// `δ_k = k · σ_k` on every axis.
    pub fn sigma_multiple(noise: &NoiseModel, k: f64) -> Result<Self> {
        let s = noise.sigma();
        Self::new(std::array::from_fn(|i| k * s[i]))
    }

    pub fn default_for(noise: &NoiseModel) -> Self {
        Self::sigma_multiple(noise, Self::DEFAULT_SIGMA_MULTIPLE)
            .expect("positive sigma times positive constant is positive")
    }

    pub fn delta(&self) -> &Axes {
        &self.delta
    }
}

impl TryFrom<Axes> for NoiseModel {
    type Error = Error;
    fn try_from(sigma: Axes) -> Result<Self> {
        Self::new(sigma)
    }
}

impl From<NoiseModel> for Axes {
    fn from(n: NoiseModel) -> Axes {
        n.sigma
    }
}

impl TryFrom<Axes> for DeltaThresholds {
    type Error = Error;
    fn try_from(delta: Axes) -> Result<Self> {
        Self::new(delta)
    }
}

impl From<DeltaThresholds> for Axes {
    fn from(d: DeltaThresholds) -> Axes {
        d.delta
    }
}

/// Stable-contact probabilities for one foot at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactEstimate {
    pub t: f64,
    pub foot: FootId,
    pub axis_probs: Axes,
    pub p_tangential: f64,
    pub p_rotational: f64,
    pub p_total: f64,
    /// False while the window holds fewer samples than its capacity.
    pub warm: bool,
}

impl ContactEstimate {
    /// Fuses per-axis probabilities under axis independence.
    pub fn from_axis_probs(t: f64, foot: FootId, axis_probs: Axes, warm: bool) -> Self {
        let p_tangential = TANGENTIAL_AXES.iter().map(|&k| axis_probs[k]).product::<f64>();
        let p_rotational = ROTATIONAL_AXES.iter().map(|&k| axis_probs[k]).product::<f64>();
        Self {
            t,
            foot,
            axis_probs,
            p_tangential,
            p_rotational,
            p_total: p_tangential * p_rotational,
            warm,
        }
    }

    /// Checks range and product identities at absolute tolerance `tol`.
    pub fn check_identities(&self, tol: f64) -> std::result::Result<(), String> {
        let in_unit = |p: f64| (0.0..=1.0).contains(&p);
        if let Some(k) = self.axis_probs.iter().position(|&p| !in_unit(p)) {
            return Err(format!("axis {k} probability {} outside [0, 1]", self.axis_probs[k]));
        }
        for (name, p) in [
            ("p_tangential", self.p_tangential),
            ("p_rotational", self.p_rotational),
            ("p_total", self.p_total),
        ] {
            if !in_unit(p) {
                return Err(format!("{name} = {p} outside [0, 1]"));
            }
        }
        let p = &self.axis_probs;
        let tan = p[AX] * p[AY] * p[WZ];
        let rot = p[AZ] * p[WX] * p[WY];
        let all: f64 = p.iter().product();
        if (self.p_tangential - tan).abs() > tol {
            return Err(format!("p_tangential {} != {tan}", self.p_tangential));
        }
        if (self.p_rotational - rot).abs() > tol {
            return Err(format!("p_rotational {} != {rot}", self.p_rotational));
        }
        if (self.p_total - all).abs() > tol
            || (self.p_total - self.p_tangential * self.p_rotational).abs() > tol
        {
            return Err(format!("p_total {} != {all}", self.p_total));
        }
        Ok(())
    }
}
