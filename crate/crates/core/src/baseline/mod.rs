//! Construction heuristics followed by guided local search.

mod construct;
mod gls;

use std::time::Duration;

use thiserror::Error;

use crate::model::{Instance, ModelError, Solution, SolutionMeta};
use crate::trace::TraceRow;

pub use construct::{
    automatic_select, construct, parallel_cheapest_insertion, path_cheapest_arc, savings_open, FirstSolutionStrategy,
};
pub use gls::{arc_utility, guided_local_search, GuidedLocalSearch, RoundOutcome};

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// When guided local search stops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopRule {
    /// Wall-clock limit measured from the start of the search.
    TimeLimit(Duration),
    /// Deterministic budget: every applied move and every penalty update costs one.
    Moves(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineParams {
    pub strategy: FirstSolutionStrategy,
    pub stop: StopRule,
    /// `lambda = lambda_factor * f(first local optimum) / arcs`.
    pub lambda_factor: f64,
    /// Optionally also stop after this many consecutive penalty rounds without
    /// a new best. Off by default, so the search uses its whole limit.
    pub stall_rounds: Option<u64>,
    /// Recorded in the solution; the search itself is deterministic.
    pub seed: u64,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            strategy: FirstSolutionStrategy::Automatic,
            stop: StopRule::TimeLimit(Duration::from_secs(5)),
            lambda_factor: 0.1,
            stall_rounds: None,
            seed: 0,
        }
    }
}

impl BaselineParams {
    pub fn validate(&self) -> Result<(), BaselineError> {
        if let StopRule::TimeLimit(limit) = self.stop {
            if limit.is_zero() {
                return Err(BaselineError::InvalidParams("time limit must be positive".into()));
            }
        }
        if !(self.lambda_factor > 0.0 && self.lambda_factor.is_finite()) {
            return Err(BaselineError::InvalidParams(format!(
                "lambda_factor must be positive, got {}",
                self.lambda_factor
            )));
        }
        Ok(())
    }
}

/// Construct, refine with GLS, drop empty routes and recompute all metrics.
pub fn solve_baseline(
    instance: &Instance,
    params: &BaselineParams,
    trace: impl FnMut(TraceRow),
) -> Result<Solution, BaselineError> {
    params.validate()?;
    let initial = construct(instance, params.strategy)?;
    let mut solution = guided_local_search(instance, &initial, params, trace);
    solution.routes.retain(|r| !r.stops.is_empty());
    solution.recompute(instance);
    solution.meta = SolutionMeta { solver: "baseline".into(), seed: params.seed, wall_time_s: 0.0 };
    Ok(solution)
}
