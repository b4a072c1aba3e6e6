use thiserror::Error;

use crate::types::FootId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value {value} on axis {axis}")]
    NonFinite { axis: usize, value: f64 },

    #[error("axis index {0} out of range 0..6")]
    AxisOutOfRange(usize),

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("timestamp {got} does not advance past {prev}")]
    NonIncreasingTime { prev: f64, got: f64 },

    #[error("stale stream: dt = {dt} s exceeds {max} s")]
    StaleStream { dt: f64, max: f64 },

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("motion detected during calibration: axis {axis} std {std} exceeds {limit}")]
    MotionDetected { axis: usize, std: f64, limit: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("sample for foot {got} fed to stream of foot {expected}")]
    MixedFeet { expected: FootId, got: FootId },

    #[error("biped and quadruped foot labels mixed ({0} with {1})")]
    MixedFamilies(FootId, FootId),

    #[error("alignment failure: {0}")]
    Alignment(String),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
