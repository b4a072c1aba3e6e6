//! File-level front end: synthetic trace generation, estimation over CSV
//! traces, evaluation against labels and a force baseline, and benchmarking.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use commands::{cmd_bench, cmd_estimate, cmd_eval, cmd_generate};
pub use config::RunConfig;
pub use error::CliError;
