//! Seeded generator of labeled single-foot gait traces.
//!
//! A scenario is an ordered list of phases. Each phase defines the true sole
//! motion and ground reaction force analytically:
//!
//! - `stance` / `soft_stance`: foot at rest, constant load (soft stance scales
//!   the normal force, 50 % by default). The IMU channels do not depend on the load.
//! - `swing`: no load; smooth sinusoidal velocity and angular velocity profiles.
//! - `impact`: load rising from zero with a decaying oscillation, sole velocity
//!   ringing with the same envelope and tapering to rest at the phase end.
//! - `slip`: loaded foot that receives a tangential push. If the push exceeds
//!   the static limit `μ_s F_z` the foot slides with `(T - μ_k F_z) / m`, then the
//!   load reverses until the foot is back at rest. While sliding the tangential
//!   load magnitude stays above the static limit.
//!
//! IMU readings are the true accelerations and angular velocities plus
//! Gaussian noise, already free of gravity and bias unless an [`Embedding`]
//! asks for them to be added back.
//!
//! Noise comes from ChaCha20 (`rand_chacha`, seeded through `seed_from_u64`)
//! turned into normals by Box-Muller, evaluated with `libm` so that the
//! same seed gives the same bits on every platform.

use std::f64::consts::{PI, TAU};

use nalgebra::{UnitQuaternion, Vector3};
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::contactmodel::{label_trace, ForceSample, FrictionModel, GroundTruthLabel, LabelerParams};
use crate::error::{invalid, Error, Result};
use crate::estimator::DEFAULT_WINDOW;
use crate::preprocess::{synthesize_raw, BiasEstimate, GravityModel, STANDARD_GRAVITY};
use crate::types::{FootId, ImuSample, NoiseModel};

pub const PRNG_ALGORITHM: &str = "chacha20(rand_chacha 0.9, seed_from_u64)+box-muller(libm)";

pub const DEFAULT_SAMPLE_RATE: f64 = 1000.0;
pub const DEFAULT_EFFECTIVE_MASS: f64 = 2.0;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    Stance,
    Swing,
    Slip,
    Impact,
    SoftStance,
}

impl PhaseKind {
    /// Phases during which the foot is meant to be on the ground.
    pub fn is_support(self) -> bool {
        matches!(self, PhaseKind::Stance | PhaseKind::SoftStance | PhaseKind::Slip)
    }
}

/// Shape parameters of a phase. Each kind reads only the fields it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Amplitude {
    /// Nominal loaded normal force, N.
    pub normal_force: f64,
    /// Multiplier on `normal_force`; defaults to 0.5 for soft stance and 1 otherwise.
    pub fz_scale: Option<f64>,
    /// Tangential load over normal load while the foot sticks.
    pub rest_ratio: f64,
    /// Tangential push over normal load in a slip phase.
    pub load_ratio: f64,
    /// Start of the push, as a fraction of the slip phase.
    pub slip_onset: f64,
    /// Push duration, as a fraction of the slip phase.
    pub push_fraction: f64,
    /// Peak swing velocity per axis, m/s.
    pub swing_velocity: [f64; 3],
    /// Peak swing angular velocity per axis, rad/s.
    pub swing_angular: [f64; 3],
    /// Vertical sole speed at touchdown, m/s.
    pub impact_velocity: f64,
    /// Peak pitch rate of the impact ringing, rad/s.
    pub impact_angular: f64,
    /// Tangential oscillation amplitude over normal load during impact.
    pub impact_tangential: f64,
    /// Hz.
    pub impact_frequency: f64,
    /// Envelope decay rate, 1/s.
    pub impact_decay: f64,
}

impl Default for Amplitude {
    fn default() -> Self {
        Self {
            normal_force: 400.0,
            fz_scale: None,
            rest_ratio: 0.02,
            load_ratio: 0.04,
            slip_onset: 0.1,
            push_fraction: 0.5,
            swing_velocity: [1.0, 0.1, 0.25],
            swing_angular: [0.3, 1.2, 0.2],
            impact_velocity: 0.05,
            impact_angular: 0.2,
            impact_tangential: 0.15,
            impact_frequency: 30.0,
            impact_decay: 10.0,
        }
    }
}

fn default_friction() -> FrictionModel {
    FrictionModel { mu_s: 0.1, mu_k: 0.08 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub kind: PhaseKind,
    /// Seconds.
    pub duration: f64,
    #[serde(default = "default_friction")]
    pub friction: FrictionModel,
    #[serde(default)]
    pub amplitude: Amplitude,
}

impl Phase {
    pub fn new(kind: PhaseKind, duration: f64) -> Self {
        Self {
            kind,
            duration,
            friction: default_friction(),
            amplitude: Amplitude::default(),
        }
    }

    pub fn with_friction(mut self, mu_s: f64, mu_k: f64) -> Self {
        self.friction = FrictionModel { mu_s, mu_k };
        self
    }

    pub fn with_fz_scale(mut self, scale: f64) -> Self {
        self.amplitude.fz_scale = Some(scale);
        self
    }

    fn fz_scale(&self) -> f64 {
        self.amplitude.fz_scale.unwrap_or(match self.kind {
            PhaseKind::SoftStance => 0.5,
            _ => 1.0,
        })
    }

    fn loaded_force(&self) -> f64 {
        self.amplitude.normal_force * self.fz_scale()
    }
}

/// Re-adds gravity, bias and a tilted attitude to the generated IMU channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Embedding {
    /// Initial roll and pitch of the foot, rad.
    pub roll: f64,
    pub pitch: f64,
    pub bias_a: [f64; 3],
    pub bias_w: [f64; 3],
    pub gravity: [f64; 3],
}

impl Default for Embedding {
    fn default() -> Self {
        Self {
            roll: 0.05,
            pitch: -0.08,
            bias_a: [0.04, -0.03, 0.06],
            bias_w: [0.004, -0.003, 0.002],
            gravity: [0.0, 0.0, -STANDARD_GRAVITY],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaitScenario {
    pub name: String,
    pub phases: Vec<Phase>,
    #[serde(default = "default_rate")]
    pub sample_rate: f64,
    /// `None` produces noiseless channels.
    #[serde(default = "default_noise")]
    pub noise: Option<NoiseModel>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_foot")]
    pub foot: FootId,
    /// Mass accelerated by the friction deficit while sliding, kg.
    #[serde(default = "default_mass")]
    pub effective_mass: f64,
    #[serde(default)]
    pub labeler: LabelerParams,
    #[serde(default)]
    pub embed: Option<Embedding>,
}

fn default_rate() -> f64 {
    DEFAULT_SAMPLE_RATE
}
fn default_noise() -> Option<NoiseModel> {
    Some(NoiseModel::nominal())
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_foot() -> FootId {
    FootId::R
}
fn default_mass() -> f64 {
    DEFAULT_EFFECTIVE_MASS
}

impl GaitScenario {
    pub fn new(name: impl Into<String>, phases: Vec<Phase>) -> Self {
        Self {
            name: name.into(),
            phases,
            sample_rate: DEFAULT_SAMPLE_RATE,
            noise: default_noise(),
            seed: DEFAULT_SEED,
            foot: FootId::R,
            effective_mass: DEFAULT_EFFECTIVE_MASS,
            labeler: LabelerParams::default(),
            embed: None,
        }
    }

    pub fn total_duration(&self) -> f64 {
        self.phases.iter().map(|p| p.duration).sum()
    }

    pub fn sample_count(&self) -> usize {
        (self.sample_rate * self.total_duration()).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.phases.is_empty() {
            return Err(Error::Empty("scenario phases"));
        }
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return Err(invalid("sample_rate", format!("must be > 0, got {}", self.sample_rate)));
        }
        if !(self.effective_mass.is_finite() && self.effective_mass > 0.0) {
            return Err(invalid("effective_mass", format!("must be > 0, got {}", self.effective_mass)));
        }
        if let Some(noise) = &self.noise {
            NoiseModel::new(*noise.sigma())?;
        }
        for (i, phase) in self.phases.iter().enumerate() {
            if !(phase.duration.is_finite() && phase.duration > 0.0) {
                return Err(invalid("phase duration", format!("phase {i} has duration {}", phase.duration)));
            }
            phase.friction.validate()?;
            let a = &phase.amplitude;
            if !(phase.fz_scale() > 0.0 && a.normal_force > 0.0) {
                return Err(invalid("phase amplitude", format!("phase {i} needs a positive normal force")));
            }
            if !(0.0..1.0).contains(&a.slip_onset) || !(a.push_fraction.is_finite() && a.push_fraction > 0.0) {
                return Err(invalid("phase amplitude", format!("phase {i} has an invalid slip timing")));
            }
            if phase.kind == PhaseKind::Slip {
                let profile = SlipProfile::new(phase, self.effective_mass);
                if profile.rest_time() > phase.duration {
                    return Err(invalid(
                        "slip phase",
                        format!(
                            "phase {i}: foot is still sliding at the phase end ({:.3} s > {:.3} s)",
                            profile.rest_time(),
                            phase.duration
                        ),
                    ));
                }
            }
        }
        let n = self.sample_count();
        if n < 2 * DEFAULT_WINDOW {
            return Err(invalid(
                "scenario",
                format!("{n} samples; at least {} required", 2 * DEFAULT_WINDOW),
            ));
        }
        Ok(())
    }
}

/// Contiguous run of samples generated by one phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: PhaseKind,
    /// Step counter: 0 before the first swing, incremented at every swing.
    pub step: usize,
    /// Sample index range `[start, end)`.
    pub start: usize,
    pub end: usize,
    pub friction: FrictionModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub scenario: GaitScenario,
    pub prng: String,
    pub precompensated: bool,
    pub segments: Vec<Segment>,
    pub label_convention: String,
}

pub const LABEL_CONVENTION: &str =
    "stable = F_z > fz_eps and |v| <= vel_eps and |w| <= vel_eps; swing samples (F_z <= fz_eps) are labeled unstable";

#[derive(Debug, Clone, PartialEq)]
pub struct GaitTrace {
    pub imu: Vec<ImuSample>,
    pub forces: Vec<ForceSample>,
    pub true_vel: Vec<[f64; 3]>,
    pub true_angvel: Vec<[f64; 3]>,
    pub labels: Vec<GroundTruthLabel>,
    pub meta: TraceMeta,
}

impl GaitTrace {
    pub fn len(&self) -> usize {
        self.imu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.imu.is_empty()
    }

    pub fn foot(&self) -> FootId {
        self.meta.scenario.foot
    }

    pub fn fz(&self) -> Vec<f64> {
        self.forces.iter().map(|f| f.f[2]).collect()
    }
}

/// Standard normals from ChaCha20 through Box-Muller.
pub(crate) struct GaussianSource {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl GaussianSource {
    pub(crate) fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform in (0, 1] with 53 random bits.
    fn uniform_open0(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub(crate) fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform_open0();
        let u2 = self.uniform_open0();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let theta = TAU * u2;
        self.spare = Some(r * libm::sin(theta));
        r * libm::cos(theta)
    }
}

/// True kinematics and load of the foot at one instant.
#[derive(Debug, Clone, Copy, Default)]
struct Kinematics {
    accel: [f64; 3],
    angvel: [f64; 3],
    vel: [f64; 3],
    force: [f64; 3],
}

struct SlipProfile {
    fz: f64,
    rest_load: f64,
    push_load: f64,
    onset: f64,
    push: f64,
    slides: bool,
    accel_push: f64,
    accel_brake: f64,
    brake: f64,
}

impl SlipProfile {
    fn new(phase: &Phase, mass: f64) -> Self {
        let a = &phase.amplitude;
        let fz = phase.loaded_force();
        let push_load = a.load_ratio * fz;
        let slides = push_load > phase.friction.static_limit(fz);
        let kinetic = phase.friction.kinetic_force(fz);
        let push = a.push_fraction * phase.duration;
        let accel_push = (push_load - kinetic) / mass;
        let accel_brake = (-push_load - kinetic) / mass;
        let brake = if slides { accel_push * push / -accel_brake } else { 0.0 };
        Self {
            fz,
            rest_load: a.rest_ratio * fz,
            push_load,
            onset: a.slip_onset * phase.duration,
            push,
            slides,
            accel_push,
            accel_brake,
            brake,
        }
    }

    fn rest_time(&self) -> f64 {
        if self.slides {
            self.onset + self.push + self.brake
        } else {
            0.0
        }
    }

    fn at(&self, tau: f64) -> Kinematics {
        let stick = Kinematics {
            force: [self.rest_load, 0.0, self.fz],
            ..Kinematics::default()
        };
        if tau < self.onset {
            return stick;
        }
        let s = tau - self.onset;
        if !self.slides {
            return if s < self.push {
                Kinematics {
                    force: [self.push_load, 0.0, self.fz],
                    ..Kinematics::default()
                }
            } else {
                stick
            };
        }
        if s < self.push {
            return Kinematics {
                accel: [self.accel_push, 0.0, 0.0],
                vel: [self.accel_push * s, 0.0, 0.0],
                force: [self.push_load, 0.0, self.fz],
                ..Kinematics::default()
            };
        }
        let b = s - self.push;
        let v = self.accel_push * self.push + self.accel_brake * b;
        if b < self.brake && v > 0.0 {
            return Kinematics {
                accel: [self.accel_brake, 0.0, 0.0],
                vel: [v, 0.0, 0.0],
                force: [-self.push_load, 0.0, self.fz],
                ..Kinematics::default()
            };
        }
        stick
    }
}

fn swing_at(phase: &Phase, tau: f64) -> Kinematics {
    let d = phase.duration;
    let a = &phase.amplitude;
    let (s1, c1) = (PI * tau / d).sin_cos();
    let (s2, c2) = (TAU * tau / d).sin_cos();
    let [vx, vy, vz] = a.swing_velocity;
    let [wx, wy, wz] = a.swing_angular;
    Kinematics {
        // v_x = vx sin²(πτ/d); v_y, v_z = v sin(2πτ/d)
        vel: [vx * s1 * s1, vy * s2, vz * s2],
        accel: [vx * PI / d * s2, vy * TAU / d * c2, vz * TAU / d * c2],
        angvel: [wx * s2, wy * s2, wz * s1 * c1],
        force: [0.0; 3],
    }
}

fn impact_at(phase: &Phase, tau: f64) -> Kinematics {
    let a = &phase.amplitude;
    let d = phase.duration;
    let lambda = a.impact_decay;
    let omega = TAU * a.impact_frequency;
    let decay = (-lambda * tau).exp();
    let taper = 1.0 - tau / d;
    let env = decay * taper;
    let env_dot = decay * (-lambda * taper - 1.0 / d);
    let (s, c) = (omega * tau).sin_cos();
    let fz = phase.loaded_force();
    let v0 = a.impact_velocity;
    Kinematics {
        vel: [0.0, 0.0, -v0 * env * c],
        accel: [0.0, 0.0, -v0 * (env_dot * c - env * omega * s)],
        angvel: [0.0, a.impact_angular * env * s, 0.0],
        force: [
            fz * (a.rest_ratio * (1.0 - env * c) + a.impact_tangential * env * s),
            0.0,
            fz * (1.0 - env * c),
        ],
    }
}

fn stance_at(phase: &Phase) -> Kinematics {
    let fz = phase.loaded_force();
    Kinematics {
        force: [phase.amplitude.rest_ratio * fz, 0.0, fz],
        ..Kinematics::default()
    }
}

/// Generates the trace of a scenario. Deterministic in the scenario (seed included).
pub fn generate(scenario: &GaitScenario) -> Result<GaitTrace> {
    scenario.validate()?;
    let n = scenario.sample_count();
    let dt = 1.0 / scenario.sample_rate;
    let foot = scenario.foot;

    let mut bounds = Vec::with_capacity(scenario.phases.len());
    let mut acc = 0.0;
    for p in &scenario.phases {
        let start = acc;
        acc += p.duration;
        bounds.push((start, acc));
    }
    let slips: Vec<Option<SlipProfile>> = scenario
        .phases
        .iter()
        .map(|p| (p.kind == PhaseKind::Slip).then(|| SlipProfile::new(p, scenario.effective_mass)))
        .collect();

    let mut gauss = GaussianSource::new(scenario.seed);
    let embed = scenario
        .embed
        .as_ref()
        .map(|e| -> Result<_> {
            let gravity = GravityModel::simulation(e.gravity)?;
            let bias = BiasEstimate {
                b_a: e.bias_a,
                b_w: e.bias_w,
            };
            Ok((gravity, bias, UnitQuaternion::from_euler_angles(e.roll, e.pitch, 0.0)))
        })
        .transpose()?;
    let mut attitude = embed.as_ref().map(|(_, _, q)| *q);

    let mut imu = Vec::with_capacity(n);
    let mut forces = Vec::with_capacity(n);
    let mut true_vel = Vec::with_capacity(n);
    let mut true_angvel = Vec::with_capacity(n);
    let mut segments: Vec<Segment> = Vec::new();
    let mut step = 0usize;
    let mut phase_idx = 0usize;
    let mut seen_phase = usize::MAX;

    for i in 0..n {
        let t = i as f64 / scenario.sample_rate;
        while phase_idx + 1 < scenario.phases.len() && t >= bounds[phase_idx].1 {
            phase_idx += 1;
        }
        let phase = &scenario.phases[phase_idx];
        if seen_phase != phase_idx {
            if phase.kind == PhaseKind::Swing {
                step += 1;
            }
            segments.push(Segment {
                kind: phase.kind,
                step,
                start: i,
                end: i,
                friction: phase.friction,
            });
            seen_phase = phase_idx;
        }
        segments.last_mut().expect("pushed above").end = i + 1;

        let tau = (t - bounds[phase_idx].0).max(0.0);
        let k = match phase.kind {
            PhaseKind::Stance | PhaseKind::SoftStance => stance_at(phase),
            PhaseKind::Swing => swing_at(phase, tau),
            PhaseKind::Impact => impact_at(phase, tau),
            PhaseKind::Slip => slips[phase_idx].as_ref().expect("slip profile").at(tau),
        };

        let (mut a, mut w) = (k.accel, k.angvel);
        if let (Some((gravity, bias, _)), Some(q)) = (&embed, attitude.as_mut()) {
            if i > 0 {
                *q *= UnitQuaternion::from_scaled_axis(Vector3::from(k.angvel) * dt);
            }
            (a, w) = synthesize_raw(a, w, q, bias, gravity);
        }
        if let Some(noise) = &scenario.noise {
            let s = noise.sigma();
            for (c, sigma) in a.iter_mut().zip(&s[..3]) {
                *c += sigma * gauss.next();
            }
            for (c, sigma) in w.iter_mut().zip(&s[3..]) {
                *c += sigma * gauss.next();
            }
        }

        imu.push(ImuSample::new(t, a, w, foot)?);
        forces.push(ForceSample::new(t, k.force, foot)?);
        true_vel.push(k.vel);
        true_angvel.push(k.angvel);
    }

    let labels = label_trace(&forces, &true_vel, &true_angvel, &scenario.labeler)?;
    Ok(GaitTrace {
        imu,
        forces,
        true_vel,
        true_angvel,
        labels,
        meta: TraceMeta {
            scenario: scenario.clone(),
            prng: PRNG_ALGORITHM.to_string(),
            precompensated: scenario.embed.is_none(),
            segments,
            label_convention: LABEL_CONVENTION.to_string(),
        },
    })
}

const DOUBLE_SUPPORT: f64 = 0.5;
const SWING: f64 = 0.4;
const IMPACT: f64 = 0.1;
const STANCE: f64 = 0.6;

fn step_phases(support: PhaseKind, mu_s: f64, mu_k: f64) -> Vec<Phase> {
    vec![
        Phase::new(PhaseKind::Swing, SWING).with_friction(mu_s, mu_k),
        Phase::new(PhaseKind::Impact, IMPACT).with_friction(mu_s, mu_k),
        Phase::new(support, STANCE).with_friction(mu_s, mu_k),
    ]
}

fn double_support() -> Phase {
    Phase::new(PhaseKind::Stance, DOUBLE_SUPPORT).with_friction(0.1, 0.08)
}

/// Built-in scenarios: `stable_walk`, `slip_walk`, `soft_walk`, `grease_walk`.
pub fn builtin_scenarios() -> Vec<GaitScenario> {
    let mut stable = vec![double_support()];
    for _ in 0..3 {
        stable.extend(step_phases(PhaseKind::Stance, 0.1, 0.08));
    }

    let mut slip = vec![double_support()];
    slip.extend(step_phases(PhaseKind::Stance, 0.1, 0.08));
    for _ in 0..2 {
        slip.extend(step_phases(PhaseKind::Slip, 0.03, 0.025));
    }

    let soft: Vec<Phase> = stable
        .iter()
        .enumerate()
        .map(|(i, p)| match (i, p.kind) {
            (0, _) => p.clone(),
            (_, PhaseKind::Stance) => Phase {
                kind: PhaseKind::SoftStance,
                ..p.clone()
            }
            .with_fz_scale(0.5),
            (_, PhaseKind::Impact) => p.clone().with_fz_scale(0.5),
            _ => p.clone(),
        })
        .collect();

    let mut grease = vec![double_support()];
    for _ in 0..3 {
        grease.extend(step_phases(PhaseKind::Slip, 0.01, 0.008));
    }
    for _ in 0..2 {
        grease.extend(step_phases(PhaseKind::Stance, 0.1, 0.08));
    }

    vec![
        GaitScenario::new("stable_walk", stable),
        GaitScenario::new("slip_walk", slip),
        GaitScenario::new("soft_walk", soft),
        GaitScenario::new("grease_walk", grease),
    ]
}

pub fn scenario_by_name(name: &str) -> Option<GaitScenario> {
    builtin_scenarios().into_iter().find(|s| s.name == name)
}

pub fn scenario_names() -> Vec<String> {
    builtin_scenarios().into_iter().map(|s| s.name).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contactmodel::coulomb_stable;

    fn noiseless(phases: Vec<Phase>) -> GaitScenario {
        GaitScenario {
            noise: None,
            ..GaitScenario::new("test", phases)
        }
    }

    #[test]
    fn pure_stance_is_silent_and_stable() {
        let trace = generate(&noiseless(vec![Phase::new(PhaseKind::Stance, 1.0)])).unwrap();
        assert_eq!(trace.len(), 1000);
        assert!(trace.imu.iter().all(|s| s.axes() == [0.0; 6]));
        assert!(trace.labels.iter().all(|l| l.stable && l.in_contact));
    }

    #[test]
    fn pure_swing_is_airborne() {
        let trace = generate(&noiseless(vec![Phase::new(PhaseKind::Swing, 0.5)])).unwrap();
        assert!(trace.labels.iter().all(|l| !l.in_contact && !l.stable));
        assert!(trace.forces.iter().all(|f| f.f == [0.0; 3]));
    }

    #[test]
    fn same_seed_same_bits() {
        let s = scenario_by_name("slip_walk").unwrap();
        assert_eq!(generate(&s).unwrap(), generate(&s).unwrap());
    }

    #[test]
    fn seeds_change_noise_not_labels() {
        let a = scenario_by_name("stable_walk").unwrap();
        let b = GaitScenario { seed: 7, ..a.clone() };
        let (ta, tb) = (generate(&a).unwrap(), generate(&b).unwrap());
        assert_eq!(ta.labels, tb.labels);
        assert_ne!(ta.imu, tb.imu);
    }

    #[test]
    fn builtin_names() {
        let names = scenario_names();
        for n in ["stable_walk", "slip_walk", "soft_walk", "grease_walk"] {
            assert!(names.iter().any(|x| x == n));
        }
        assert!(scenario_by_name("nope").is_none());
        for s in builtin_scenarios() {
            s.validate().unwrap();
        }
    }

    #[test]
    fn slip_walk_labels_by_step() {
        let trace = generate(&scenario_by_name("slip_walk").unwrap()).unwrap();
        for seg in trace.meta.segments.iter().filter(|s| s.kind.is_support()) {
            let labels = &trace.labels[seg.start..seg.end];
            let unstable_contact = labels.iter().filter(|l| l.in_contact && !l.stable).count();
            match seg.step {
                0 | 1 => assert_eq!(unstable_contact, 0, "step {}", seg.step),
                _ => assert!(unstable_contact > labels.len() / 2, "step {}", seg.step),
            }
        }
    }

    #[test]
    fn slip_instants_violate_coulomb() {
        for name in ["slip_walk", "grease_walk"] {
            let trace = generate(&scenario_by_name(name).unwrap()).unwrap();
            for seg in trace.meta.segments.iter().filter(|s| s.kind == PhaseKind::Slip) {
                for i in seg.start..seg.end {
                    let l = &trace.labels[i];
                    if l.in_contact && !l.stable {
                        assert!(!coulomb_stable(&trace.forces[i], seg.friction.mu_s), "{name} sample {i}");
                    }
                }
            }
        }
    }

    #[test]
    fn soft_walk_halves_load_keeps_imu() {
        let stable = generate(&scenario_by_name("stable_walk").unwrap()).unwrap();
        let soft = generate(&scenario_by_name("soft_walk").unwrap()).unwrap();
        assert_eq!(stable.imu, soft.imu);
        let dsupport_end = soft.meta.segments[0].end;
        for i in dsupport_end..soft.len() {
            let (a, b) = (stable.forces[i].f[2], soft.forces[i].f[2]);
            assert!((b - 0.5 * a).abs() < 1e-9, "sample {i}: {a} vs {b}");
        }
    }

    #[test]
    fn stance_noise_matches_declared_sigma() {
        let scenario = GaitScenario::new("still", vec![Phase::new(PhaseKind::Stance, 6.0)]);
        let trace = generate(&scenario).unwrap();
        assert!(trace.len() >= 5000);
        let sigma = NoiseModel::nominal();
        for k in 0..6 {
            let xs: Vec<f64> = trace.imu.iter().map(|s| s.axes()[k]).collect();
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
            let ratio = var.sqrt() / sigma.sigma()[k];
            assert!((ratio - 1.0).abs() < 0.1, "axis {k}: {ratio}");
        }
    }

    #[test]
    fn uniform_grid_and_alignment() {
        let trace = generate(&scenario_by_name("grease_walk").unwrap()).unwrap();
        let n = trace.len();
        assert_eq!(n, trace.meta.scenario.sample_count());
        assert_eq!(trace.forces.len(), n);
        assert_eq!(trace.true_vel.len(), n);
        assert_eq!(trace.true_angvel.len(), n);
        assert_eq!(trace.labels.len(), n);
        for (i, s) in trace.imu.iter().enumerate() {
            assert_eq!(s.t, i as f64 / 1000.0);
            assert_eq!(trace.forces[i].t, s.t);
            assert_eq!(trace.labels[i].t, s.t);
        }
        assert_eq!(trace.meta.segments.last().unwrap().end, n);
    }

    #[test]
    fn labels_are_self_consistent() {
        for s in builtin_scenarios() {
            let trace = generate(&s).unwrap();
            let again = label_trace(&trace.forces, &trace.true_vel, &trace.true_angvel, &s.labeler).unwrap();
            assert_eq!(again, trace.labels);
        }
    }

    #[test]
    fn invalid_scenarios() {
        assert!(generate(&noiseless(vec![])).is_err());
        assert!(generate(&noiseless(vec![Phase::new(PhaseKind::Stance, -1.0)])).is_err());
        assert!(generate(&noiseless(vec![Phase::new(PhaseKind::Stance, 0.05)])).is_err());
        let bad_friction = Phase::new(PhaseKind::Stance, 1.0).with_friction(0.1, 0.2);
        assert!(generate(&noiseless(vec![bad_friction])).is_err());
        // Push so long the foot cannot stop inside the phase.
        let mut runaway = Phase::new(PhaseKind::Slip, 0.6).with_friction(0.01, 0.008);
        runaway.amplitude.push_fraction = 0.85;
        assert!(generate(&noiseless(vec![runaway])).is_err());
    }

    #[test]
    fn high_friction_slip_phase_sticks() {
        let phase = Phase::new(PhaseKind::Slip, 0.6).with_friction(0.1, 0.08);
        let trace = generate(&noiseless(vec![phase])).unwrap();
        assert!(trace.labels.iter().all(|l| l.stable));
    }
}
