//! Removal of gravity and sensor bias from raw foot IMU readings.
//!
//! Raw readings follow
//!
//! ```text
//! a_raw = a_true + R_fw · (-g) + b_a + noise
//! w_raw = w_true + b_w + noise
//! ```
//!
//! where `R_fw` rotates world vectors into the foot frame. The accelerometer
//! measures specific force, so a foot at rest with `g = (0, 0, -9.80665)` reads
//! `+9.80665` along its up axis. The foot attitude is tracked by a
//! complementary filter: gyro integration plus a first-order pull of the tilt
//! toward the measured gravity direction. Yaw is not observable from the
//! accelerometer and is left to drift; only tilt enters the gravity term.

use nalgebra::{UnitQuaternion, Vector3};

use crate::error::{invalid, Error, Result};
use crate::types::{ImuSample, NoiseModel};

pub const STANDARD_GRAVITY: f64 = 9.80665;
pub const DEFAULT_FILTER_GAIN: f64 = 0.02;
pub const DEFAULT_MAX_DT: f64 = 0.1;
pub const MIN_CALIBRATION_SAMPLES: usize = 100;
pub const DEFAULT_MAX_ACCEL_BIAS: f64 = 1.0;
pub const DEFAULT_MAX_GYRO_BIAS: f64 = 0.5;

fn vec3(v: [f64; 3]) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2])
}

fn arr3(v: Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GravityModel {
    g: Vector3<f64>,
}

impl GravityModel {
    /// Gravity with a plausibility check on its norm (9.7 to 9.9 m/s²).
    pub fn new(g: [f64; 3]) -> Result<Self> {
        let model = Self::simulation(g)?;
        let norm = model.g.norm();
        if !(9.7..=9.9).contains(&norm) {
            return Err(invalid(
                "gravity",
                format!("norm {norm} outside [9.7, 9.9] m/s² (use a simulation override)"),
            ));
        }
        Ok(model)
    }

    /// Any finite, non-zero gravity vector.
    pub fn simulation(g: [f64; 3]) -> Result<Self> {
        let g = vec3(g);
        if !g.iter().all(|c| c.is_finite()) || g.norm() == 0.0 {
            return Err(invalid("gravity", "must be finite and non-zero"));
        }
        Ok(Self { g })
    }

    pub fn vector(&self) -> [f64; 3] {
        arr3(self.g)
    }

    pub fn norm(&self) -> f64 {
        self.g.norm()
    }

    /// Unit vector opposite to gravity, in the world frame.
    fn up(&self) -> Vector3<f64> {
        -self.g / self.g.norm()
    }

    /// What a still accelerometer with attitude `q` (foot to world) reads from gravity alone.
    pub fn reaction_in_foot(&self, q: &UnitQuaternion<f64>) -> Vector3<f64> {
        q.inverse_transform_vector(&(-self.g))
    }
}

impl Default for GravityModel {
    fn default() -> Self {
        Self {
            g: Vector3::new(0.0, 0.0, -STANDARD_GRAVITY),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BiasEstimate {
    pub b_a: [f64; 3],
    pub b_w: [f64; 3],
}

impl BiasEstimate {
    pub fn validate(&self, max_accel: f64, max_gyro: f64) -> Result<()> {
        let (a, w) = (vec3(self.b_a), vec3(self.b_w));
        if !a.iter().chain(w.iter()).all(|c| c.is_finite()) {
            return Err(invalid("bias", "non-finite component"));
        }
        if a.norm() >= max_accel {
            return Err(invalid(
                "bias",
                format!("accelerometer bias {} m/s² exceeds {max_accel}", a.norm()),
            ));
        }
        if w.norm() >= max_gyro {
            return Err(invalid(
                "bias",
                format!("gyroscope bias {} rad/s exceeds {max_gyro}", w.norm()),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeState {
    /// Rotation from the foot frame to the world frame.
    pub q: UnitQuaternion<f64>,
    pub t_last: f64,
}

impl AttitudeState {
    pub fn identity(t: f64) -> Self {
        Self {
            q: UnitQuaternion::identity(),
            t_last: t,
        }
    }
}

/// Tilt-correcting complementary filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplementaryFilter {
    /// Fraction of the tilt error removed per update, in `[0, 1]`.
    pub gain: f64,
    /// Largest accepted gap between updates, seconds.
    pub max_dt: f64,
    pub gravity: GravityModel,
}

impl Default for ComplementaryFilter {
    fn default() -> Self {
        Self {
            gain: DEFAULT_FILTER_GAIN,
            max_dt: DEFAULT_MAX_DT,
            gravity: GravityModel::default(),
        }
    }
}

impl ComplementaryFilter {
    pub fn new(gain: f64, gravity: GravityModel) -> Result<Self> {
        let filter = Self {
            gain,
            gravity,
            ..Self::default()
        };
        filter.validate()?;
        Ok(filter)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gain) {
            return Err(invalid("filter_gain", format!("must lie in [0, 1], got {}", self.gain)));
        }
        if self.max_dt.is_nan() || self.max_dt <= 0.0 {
            return Err(invalid("max_dt", format!("must be > 0, got {}", self.max_dt)));
        }
        Ok(())
    }

    pub fn update(&self, state: &AttitudeState, raw: &ImuSample, bias: &BiasEstimate) -> Result<AttitudeState> {
        raw.validate()?;
        let dt = raw.t - state.t_last;
        if dt <= 0.0 {
            return Err(Error::NonIncreasingTime {
                prev: state.t_last,
                got: raw.t,
            });
        }
        if dt > self.max_dt {
            return Err(Error::StaleStream { dt, max: self.max_dt });
        }

        let omega = vec3(raw.w) - vec3(bias.b_w);
        let mut q = state.q * UnitQuaternion::from_scaled_axis(omega * dt);

        let specific_force = vec3(raw.a) - vec3(bias.b_a);
        let norm = specific_force.norm();
        if self.gain > 0.0 && norm > f64::EPSILON {
            let measured_up = q.transform_vector(&(specific_force / norm));
            // Antiparallel vectors have no unique shortest rotation; skip the correction then.
            if let Some(correction) = UnitQuaternion::rotation_between(&measured_up, &self.gravity.up()) {
                let partial = correction.powf(self.gain);
                q = partial * q;
            }
        }
        q.renormalize();
        Ok(AttitudeState { q, t_last: raw.t })
    }
}

/// Single filter step with default gravity and stale-stream limit.
pub fn filter_update(state: &AttitudeState, raw: &ImuSample, bias: &BiasEstimate, gain: f64) -> Result<AttitudeState> {
    let filter = ComplementaryFilter {
        gain,
        ..ComplementaryFilter::default()
    };
    filter.validate()?;
    filter.update(state, raw, bias)
}

/// Removes bias and the gravity reaction, leaving true motion plus noise.
pub fn compensate(raw: &ImuSample, state: &AttitudeState, bias: &BiasEstimate, gravity: &GravityModel) -> ImuSample {
    let a = vec3(raw.a) - vec3(bias.b_a) - gravity.reaction_in_foot(&state.q);
    let w = vec3(raw.w) - vec3(bias.b_w);
    ImuSample {
        t: raw.t,
        a: arr3(a),
        w: arr3(w),
        foot: raw.foot,
    }
}

/// Forward measurement model without noise: the raw reading produced by true
/// motion `(a_true, w_true)` at attitude `q` with the given bias.
pub fn synthesize_raw(
    a_true: [f64; 3],
    w_true: [f64; 3],
    q: &UnitQuaternion<f64>,
    bias: &BiasEstimate,
    gravity: &GravityModel,
) -> ([f64; 3], [f64; 3]) {
    let a = vec3(a_true) + gravity.reaction_in_foot(q) + vec3(bias.b_a);
    let w = vec3(w_true) + vec3(bias.b_w);
    (arr3(a), arr3(w))
}

struct AxisStats {
    mean: [f64; 6],
    std: [f64; 6],
}

fn axis_stats(samples: &[ImuSample]) -> AxisStats {
    let n = samples.len() as f64;
    let mut mean = [0.0; 6];
    for s in samples {
        for (m, v) in mean.iter_mut().zip(s.axes()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = [0.0; 6];
    for s in samples {
        for ((acc, v), m) in var.iter_mut().zip(s.axes()).zip(mean) {
            *acc += (v - m) * (v - m);
        }
    }
    let std = var.map(|v| (v / (n - 1.0).max(1.0)).sqrt());
    AxisStats { mean, std }
}

/// Estimates constant accelerometer and gyro biases from a window recorded
/// while the foot is known to be still.
///
/// The gyro bias is the mean gyro reading. The accelerometer bias is the mean
/// reading minus a gravity reaction of nominal magnitude along the mean
/// direction; bias components orthogonal to gravity are indistinguishable
/// from tilt and end up in the attitude instead.
pub fn calibrate_bias(stationary: &[ImuSample], gravity: &GravityModel, noise: &NoiseModel) -> Result<BiasEstimate> {
    if stationary.len() < MIN_CALIBRATION_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_CALIBRATION_SAMPLES,
            got: stationary.len(),
        });
    }
    for s in stationary {
        s.validate()?;
    }
    let stats = axis_stats(stationary);
    for axis in 0..6 {
        let limit = 10.0 * noise.sigma()[axis];
        if stats.std[axis] > limit {
            return Err(Error::MotionDetected {
                axis,
                std: stats.std[axis],
                limit,
            });
        }
    }
    let mean_a = Vector3::new(stats.mean[0], stats.mean[1], stats.mean[2]);
    if mean_a.norm() < 1e-6 {
        return Err(invalid("calibration", "mean acceleration is zero; no gravity reaction seen"));
    }
    let reaction = mean_a.normalize() * gravity.norm();
    let bias = BiasEstimate {
        b_a: arr3(mean_a - reaction),
        b_w: [stats.mean[3], stats.mean[4], stats.mean[5]],
    };
    bias.validate(DEFAULT_MAX_ACCEL_BIAS, DEFAULT_MAX_GYRO_BIAS)?;
    Ok(bias)
}

/// Attitude whose gravity reaction points along the mean accelerometer
/// reading of a still window, with zero yaw convention left to the rotation.
pub fn level_attitude(stationary: &[ImuSample], bias: &BiasEstimate, gravity: &GravityModel) -> Result<AttitudeState> {
    let last = stationary.last().ok_or(Error::Empty("stationary samples"))?;
    let stats = axis_stats(stationary);
    let mean_a = Vector3::new(stats.mean[0], stats.mean[1], stats.mean[2]) - vec3(bias.b_a);
    if mean_a.norm() < 1e-6 {
        return Err(invalid("calibration", "mean acceleration is zero; no gravity reaction seen"));
    }
    let up = gravity.up();
    let q = UnitQuaternion::rotation_between(&mean_a.normalize(), &up)
        .unwrap_or_else(|| UnitQuaternion::from_scaled_axis(Vector3::x() * std::f64::consts::PI));
    Ok(AttitudeState { q, t_last: last.t })
}

/// Streaming preprocessor for one foot: calibrated once, then filters and
/// compensates each sample in order.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    filter: ComplementaryFilter,
    bias: BiasEstimate,
    initial: UnitQuaternion<f64>,
    state: Option<AttitudeState>,
}

impl Preprocessor {
    pub fn new(filter: ComplementaryFilter, bias: BiasEstimate, initial: UnitQuaternion<f64>) -> Result<Self> {
        filter.validate()?;
        Ok(Self {
            filter,
            bias,
            initial,
            state: None,
        })
    }

    /// Calibrates from a still window, which may later be fed through [`Preprocessor::process`] again.
    pub fn calibrate(filter: ComplementaryFilter, stationary: &[ImuSample], noise: &NoiseModel) -> Result<Self> {
        let bias = calibrate_bias(stationary, &filter.gravity, noise)?;
        let attitude = level_attitude(stationary, &bias, &filter.gravity)?;
        Self::new(filter, bias, attitude.q)
    }

    pub fn bias(&self) -> &BiasEstimate {
        &self.bias
    }

    pub fn attitude(&self) -> Option<&AttitudeState> {
        self.state.as_ref()
    }

    pub fn process(&mut self, raw: &ImuSample) -> Result<ImuSample> {
        let next = match &self.state {
            None => {
                raw.validate()?;
                AttitudeState {
                    q: self.initial,
                    t_last: raw.t,
                }
            }
            Some(state) => self.filter.update(state, raw, &self.bias)?,
        };
        self.state = Some(next);
        Ok(compensate(raw, &next, &self.bias, &self.filter.gravity))
    }
}
