//! Config-driven experiment runner for the `thinfilm` library.

pub mod config;
pub mod error;
pub mod runner;
pub mod sweep;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{CliError, Result};
pub use runner::{run_experiment, simulate, RunSummary};
pub use sweep::{sweep_critical_n, SweepResult, SweepRow};
