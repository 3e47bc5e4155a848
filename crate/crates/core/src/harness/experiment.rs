//! Seeded multi-run experiments.
//!
//! Each run is timed with the wall clock from the moment the solver is ready
//! until it returns. Loading the instance, building the matrix and initializing
//! the solver all happen before the timer starts.

use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::aco::{AcoParams, Colony, Preset};
use crate::baseline::{solve_baseline, BaselineParams, StopRule};
use crate::model::{Instance, Solution};
use crate::trace::TraceRow;

use super::io::load_instance;
use super::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub enum SolverConfig {
    Aco { label: String, params: AcoParams },
    Baseline { label: String, params: BaselineParams },
}

impl SolverConfig {
    pub fn aco_preset(preset: Preset) -> Self {
        let label = match preset {
            Preset::Exploitation => "ACO (Exploit.)",
            Preset::Exploration => "ACO (Explor.)",
        };
        Self::Aco { label: label.into(), params: preset.params() }
    }

    pub fn baseline(params: BaselineParams) -> Self {
        Self::Baseline { label: "Baseline".into(), params }
    }

    pub fn label(&self) -> &str {
        match self {
            Self::Aco { label, .. } | Self::Baseline { label, .. } => label,
        }
    }

    pub fn solver_name(&self) -> &'static str {
        match self {
            Self::Aco { .. } => "aco",
            Self::Baseline { .. } => "baseline",
        }
    }

    /// Parameters as recorded in solution and report files. The seed is kept separately.
    pub fn params_json(&self) -> Value {
        match self {
            Self::Aco { params: p, .. } => json!({
                "alpha": p.alpha,
                "beta": p.beta,
                "rho": p.rho,
                "q0": p.q0,
                "ants": p.ants,
                "iterations": p.iterations,
                "stagnation_limit": p.stagnation_limit,
                "max_attempts": p.max_attempts,
                "tau0": p.tau0,
            }),
            Self::Baseline { params: p, .. } => {
                let stop = match p.stop {
                    StopRule::TimeLimit(d) => json!({ "time_limit_s": d.as_secs_f64() }),
                    StopRule::Moves(m) => json!({ "budget_moves": m }),
                };
                json!({
                    "strategy": p.strategy.name(),
                    "stop": stop,
                    "lambda_factor": p.lambda_factor,
                    "stall_rounds": p.stall_rounds,
                })
            }
        }
    }
}

/// Setup and timing milestones, reported in the order they happen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbeEvent {
    /// Instance parsed and distance matrix ready.
    InstanceLoaded,
    SolverInitialized {
        run: usize,
    },
    TimerStarted {
        run: usize,
    },
    Trace {
        run: usize,
        row: TraceRow,
    },
    TimerStopped {
        run: usize,
    },
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub instance: PathBuf,
    pub solver: SolverConfig,
    pub runs: usize,
    pub seed_base: u64,
    /// Run whole solves on separate threads. Timings are then not protocol-grade.
    pub parallel: bool,
}

impl ExperimentSpec {
    pub fn new(instance: impl Into<PathBuf>, solver: SolverConfig) -> Self {
        Self { instance: instance.into(), solver, runs: 10, seed_base: 0, parallel: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub distance_km: f64,
    pub wall_time_s: f64,
}

/// Mean and sample standard deviation (n - 1 denominator; 0 when n = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub mean: f64,
    pub std: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { mean: f64::NAN, std: f64::NAN };
        }
        if values.iter().all(|&v| v == values[0]) {
            return Self { mean: values[0], std: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std =
            if n == 1 { 0.0 } else { (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() };
        Self { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub label: String,
    pub solver: String,
    pub instance: String,
    pub params: Value,
    pub runs: Vec<RunRecord>,
    pub distance_km: Stats,
    pub wall_time_s: Stats,
    /// Only one run, so the std fields are 0 by convention rather than measured.
    pub single_run: bool,
    /// False when runs overlapped in time and wall times are not comparable.
    pub protocol_timing: bool,
}

impl RunReport {
    pub fn from_runs(
        label: &str,
        solver: &str,
        instance: &str,
        params: Value,
        runs: Vec<RunRecord>,
        protocol_timing: bool,
    ) -> Self {
        let dist: Vec<f64> = runs.iter().map(|r| r.distance_km).collect();
        let time: Vec<f64> = runs.iter().map(|r| r.wall_time_s).collect();
        Self {
            label: label.into(),
            solver: solver.into(),
            instance: instance.into(),
            params,
            distance_km: Stats::of(&dist),
            wall_time_s: Stats::of(&time),
            single_run: runs.len() == 1,
            runs,
            protocol_timing,
        }
    }

    pub fn best_distance_km(&self) -> Option<f64> {
        self.runs.iter().map(|r| r.distance_km).min_by(f64::total_cmp)
    }
}

/// Convergence rows, one vector per run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceTrace {
    pub runs: Vec<Vec<TraceRow>>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub report: RunReport,
    pub trace: ConvergenceTrace,
    pub solutions: Vec<Solution>,
}

/// One timed solve. `wall_time_s` of the returned solution is the measured time.
pub fn timed_solve(
    instance: &Instance,
    solver: &SolverConfig,
    seed: u64,
    run: usize,
    probe: &mut dyn FnMut(ProbeEvent),
) -> Result<(Solution, Vec<TraceRow>), String> {
    let mut rows = Vec::new();
    let (mut solution, elapsed) = match solver {
        SolverConfig::Aco { params, .. } => {
            let colony = Colony::new(instance, params.clone().with_seed(seed)).map_err(|e| e.to_string())?;
            probe(ProbeEvent::SolverInitialized { run });
            probe(ProbeEvent::TimerStarted { run });
            let start = Instant::now();
            let result = colony.run(|row| {
                rows.push(row);
                probe(ProbeEvent::Trace { run, row });
            });
            let elapsed = start.elapsed();
            probe(ProbeEvent::TimerStopped { run });
            (result.map_err(|e| e.to_string())?, elapsed)
        }
        SolverConfig::Baseline { params, .. } => {
            let params = BaselineParams { seed, ..params.clone() };
            params.validate().map_err(|e| e.to_string())?;
            probe(ProbeEvent::SolverInitialized { run });
            probe(ProbeEvent::TimerStarted { run });
            let start = Instant::now();
            let result = solve_baseline(instance, &params, |row| {
                rows.push(row);
                probe(ProbeEvent::Trace { run, row });
            });
            let elapsed = start.elapsed();
            probe(ProbeEvent::TimerStopped { run });
            (result.map_err(|e| e.to_string())?, elapsed)
        }
    };
    solution.meta.wall_time_s = elapsed.as_secs_f64();
    Ok((solution, rows))
}

/// Loads the instance, then runs the experiment on it.
pub fn run_experiment(
    spec: &ExperimentSpec,
    mut probe: impl FnMut(ProbeEvent),
) -> Result<ExperimentOutcome, HarnessError> {
    let instance = load_instance(&spec.instance)?;
    probe(ProbeEvent::InstanceLoaded);
    run_experiment_on(&instance, &spec.solver, spec.runs, spec.seed_base, spec.parallel, probe)
}

/// Runs `runs` seeded solves with seeds `seed_base + r`.
///
/// In parallel mode the probe only sees events after all runs have finished.
pub fn run_experiment_on(
    instance: &Instance,
    solver: &SolverConfig,
    runs: usize,
    seed_base: u64,
    parallel: bool,
    mut probe: impl FnMut(ProbeEvent),
) -> Result<ExperimentOutcome, HarnessError> {
    if runs == 0 {
        return Err(HarnessError::Format("runs must be at least 1".into()));
    }
    let seed_of = |r: usize| seed_base.wrapping_add(r as u64);
    let results: Vec<Result<(Solution, Vec<TraceRow>), String>> = if parallel {
        let outcomes: Vec<_> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..runs)
                .map(|r| {
                    scope.spawn(move || {
                        let mut events = Vec::new();
                        let res = timed_solve(instance, solver, seed_of(r), r, &mut |e| events.push(e));
                        (res, events)
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
        });
        outcomes
            .into_iter()
            .map(|(res, events)| {
                events.into_iter().for_each(&mut probe);
                res
            })
            .collect()
    } else {
        let mut out = Vec::with_capacity(runs);
        for r in 0..runs {
            let res = timed_solve(instance, solver, seed_of(r), r, &mut probe);
            let failed = res.is_err();
            out.push(res);
            if failed {
                break;
            }
        }
        out
    };

    let mut records = Vec::with_capacity(runs);
    let mut trace = ConvergenceTrace::default();
    let mut solutions = Vec::with_capacity(runs);
    for (run, res) in results.into_iter().enumerate() {
        let (solution, rows) = res.map_err(|message| HarnessError::RunFailed { run, message })?;
        records.push(RunRecord {
            run,
            seed: seed_of(run),
            distance_km: solution.total_distance,
            wall_time_s: solution.meta.wall_time_s,
        });
        trace.runs.push(rows);
        solutions.push(solution);
    }
    let report = RunReport::from_runs(
        solver.label(),
        solver.solver_name(),
        instance.name(),
        solver.params_json(),
        records,
        !parallel,
    );
    Ok(ExperimentOutcome { report, trace, solutions })
}
