//! Open capacitated vehicle routing: ant colony optimization, a construction
//! plus guided local search baseline, and a benchmark harness.
//!
//! Routes are open: a vehicle leaves the depot (location 0) and stops at its
//! last customer.

pub mod aco;
pub mod baseline;
pub mod harness;
pub mod localsearch;
pub mod matrix;
pub mod model;
pub mod trace;

#[cfg(test)]
mod testutil;

pub use aco::{solve_aco, AcoParams, Preset};
pub use baseline::{solve_baseline, BaselineParams, FirstSolutionStrategy, StopRule};
pub use matrix::{DistanceMatrix, DistanceMode};
pub use model::{validate_solution, Instance, Location, Route, Solution, Vehicle};
pub use trace::TraceRow;
