//! Experiment driver behind the `smmc` binary: configuration, repeated runs
//! with RMSE against a reference, and file output.

pub mod config;
pub mod experiment;
pub mod report;

pub use config::{Method, RunConfig};
pub use experiment::{relative_mse, run_experiment, run_once, sweep, RunOutcome};
pub use report::{export_ccdf, import_ccdf, read_runs_csv, write_trace, ExperimentReport};
