//! Ant colony optimization for the open capacitated VRP.
//!
//! Each ant starts at the depot with the first vehicle and repeatedly applies
//! the pseudo-random proportional rule: with probability `q0` it takes the arc
//! maximizing `tau^alpha * eta^beta` (with `eta = 1/d`), otherwise it samples an
//! arc with probability proportional to that product. When no unvisited
//! customer fits the vehicle, the ant returns to the depot with the next vehicle
//! in fleet order. Routes never close back to the depot.
//!
//! After every ant's routes are improved by 2-opt, all trails evaporate by
//! `rho` and every ant deposits `1 / C_k` on the arcs it used. When the global
//! best has not improved for `stagnation_limit` iterations, every trail except
//! those on the best solution's arcs is reset to `tau0`.

mod colony;
mod params;
mod pheromone;

use thiserror::Error;

use crate::model::ModelError;

pub use colony::{
    attractiveness, choose_next, construct_solution, default_tau0, solve_aco, transition_probabilities, AntState,
    Colony, IterationOutcome, Step, MIN_HEURISTIC_DISTANCE,
};
pub use params::{AcoParams, Preset};
pub use pheromone::{PheromoneMatrix, TAU_MIN};

#[derive(Debug, Error)]
pub enum AcoError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    /// `attempts` is 0 when total demand exceeds the fleet and nothing was tried.
    #[error("{}", infeasible_message(*attempts))]
    InfeasibleConstruction { attempts: usize },
    #[error("deposit cost must be positive, got {0}")]
    InvalidCost(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn infeasible_message(attempts: usize) -> String {
    if attempts == 0 {
        "infeasible: total demand exceeds fleet capacity".into()
    } else {
        format!("infeasible: no complete construction after {attempts} attempts")
    }
}
