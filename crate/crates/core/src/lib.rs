//! Probability of stable foot-ground contact from a foot-mounted IMU.
//!
//! The estimator keeps a short sliding window of gravity- and bias-free IMU
//! samples per foot. On each of the six axes the window is smoothed into a
//! Gaussian KDE whose bandwidth is the sensor noise sigma, and the density mass
//! on a small interval around zero is read as the probability that the axis is
//! truly at rest. The product over axes is the stable-contact probability.
//!
//! Besides the estimator the crate provides IMU preprocessing (bias
//! calibration, complementary attitude filter, gravity removal), a labeled
//! synthetic gait generator, force-based ground truth with a Schmitt-trigger
//! baseline, and scoring utilities.

pub mod contactmodel;
pub mod error;
pub mod estimator;
pub mod eval;
pub mod kde;
pub mod normal;
pub mod preprocess;
pub mod synthgait;
pub mod types;
pub mod window;

pub use contactmodel::{
    coulomb_stable, label_trace, schmitt_contact, ForceSample, FrictionModel, GroundTruthLabel, LabelerParams,
    SchmittParams,
};
pub use error::{Error, Result};
pub use estimator::{estimate_series, EstimatorConfig, FootEstimator};
pub use eval::{compare, compare_trace, rmse, throughput_bench, Comparison, EvalReport};
pub use kde::Kde1d;
pub use preprocess::{BiasEstimate, ComplementaryFilter, GravityModel, Preprocessor};
pub use synthgait::{generate, scenario_by_name, GaitScenario, GaitTrace, Phase, PhaseKind};
pub use types::{Axes, ContactEstimate, DeltaThresholds, FootId, ImuSample, NoiseModel};
pub use window::SampleWindow;
