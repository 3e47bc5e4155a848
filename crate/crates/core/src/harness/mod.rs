//! Instance I/O, synthetic generation, timed experiments and exports.

mod experiment;
mod export;
mod generate;
mod io;

use std::path::PathBuf;

use thiserror::Error;

pub use experiment::{
    run_experiment, run_experiment_on, timed_solve, ConvergenceTrace, ExperimentOutcome, ExperimentSpec, ProbeEvent,
    RunRecord, RunReport, SolverConfig, Stats,
};
pub use export::{export_geojson, export_trace, format_mean_std, format_table, geojson, trace_csv, TRACE_HEADER};
pub use generate::{generate_instance, BoundingBox, GeneratorSpec, Layout};
pub use io::{
    canonicalize, export_solution, instance_warnings, load_instance, load_solution, parse_instance, save_instance,
    to_canonical_string, InstanceFile, LocationRecord, RouteRecord, SolutionRecord, VehicleRecord,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot access {path}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("format error: {0}")]
    Format(String),
    #[error("inconsistent input: {0}")]
    Consistency(String),
    #[error("run {run} failed: {message}")]
    RunFailed { run: usize, message: String },
}
