//! Config-driven experiment runner for `cuspwave`: TOML in, CSV/JSON out.

pub mod config;
pub mod emit;
pub mod error;
pub mod experiment;
pub mod presets;

pub use config::{Experiment, ExperimentConfig};
pub use emit::{emit_table, read_json_table, Metadata, TableFormat, TableRow};
pub use error::{CliError, CliResult};
pub use experiment::{run_experiment, RunOptions, RunSummary, MAX_BASIS};
