//! Config-driven runner for the percolation laboratory.
//!
//! A scenario file names one experiment; [`run::run_scenario`] executes it
//! and [`run::emit_outputs`] writes `results.csv`, `report.json` and
//! `plot.dat`. Numeric output depends only on the config and its seed.

pub mod config;
pub mod run;
pub mod schema;

pub use config::{parse_config, ExperimentConfig};
pub use run::{emit_outputs, run_scenario, RunError, RunReport};
