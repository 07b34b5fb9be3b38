//! Config-driven experiment runner: parses experiment files, drives the
//! flows in `pcflow-core`, writes CSV/JSON artifacts, sweeps resolutions and
//! runs the acceptance suite.

pub mod catalog;
pub mod check;
pub mod cli;
pub mod config;
pub mod error;
pub mod run;
pub mod sweep;

pub use config::{load_config, parse_config, ExperimentConfig};
pub use error::{PcflowError, Result};
pub use run::{run_experiment, RunReport, RunSummary};
pub use sweep::{run_sweep, sweep, ConvergenceReport};
