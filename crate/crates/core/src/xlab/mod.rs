//! Experiment orchestration: JSON configs, power-law fits and result
//! bundles.

pub mod config;
pub mod fit;
pub mod run;

pub use config::{ExperimentConfig, ExperimentKind, Resolved};
pub use fit::{fit_power_law, RateFit};
pub use run::{execute, run, run_file, Outcome, Summary};
