//! Configuration, experiment runs, the verification suite and the scaling
//! probe behind the command-line tool.

pub mod config;
pub mod experiment;
pub mod scaling;
pub mod verify;

pub use config::{ExperimentConfig, DEFAULT_SEED, PRESETS};
pub use experiment::{run_experiment, RunResults, RunSummary, TRACE_HEADER};
pub use scaling::{scaling_probe, ScalingRow};
pub use verify::{verify_suite, Property, VerifyReport};
