use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ocvrp::aco::Preset;
use ocvrp::baseline::{BaselineParams, FirstSolutionStrategy, StopRule};
use ocvrp::harness::{
    export_geojson, export_solution, export_trace, format_table, generate_instance, instance_warnings, load_instance,
    run_experiment_on, save_instance, timed_solve, to_canonical_string, BoundingBox, GeneratorSpec, HarnessError,
    Layout, SolutionRecord, SolverConfig,
};
use ocvrp::matrix::save_matrix;
use ocvrp::model::Instance;

/// Open capacitated vehicle routing: solve, benchmark and generate instances.
#[derive(Parser)]
#[command(name = "ocvrp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and write the solution JSON.
    Solve(SolveArgs),
    /// Run seeded repetitions of several solvers and tabulate mean ± std.
    Bench(BenchArgs),
    /// Generate a synthetic unit-demand instance.
    Gen(GenArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverKind {
    Aco,
    Baseline,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Exploitation,
    Exploration,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Exploitation => Preset::Exploitation,
            PresetArg::Exploration => Preset::Exploration,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Pca,
    Pci,
    Savings,
    Auto,
}

impl From<StrategyArg> for FirstSolutionStrategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Pca => FirstSolutionStrategy::PathCheapestArc,
            StrategyArg::Pci => FirstSolutionStrategy::ParallelCheapestInsertion,
            StrategyArg::Savings => FirstSolutionStrategy::Savings,
            StrategyArg::Auto => FirstSolutionStrategy::Automatic,
        }
    }
}

#[derive(Args)]
struct BaselineStop {
    /// Baseline wall-clock limit in seconds.
    #[arg(long, value_name = "S", conflicts_with = "budget_moves")]
    time_limit: Option<f64>,
    /// Deterministic baseline budget: moves plus penalty updates.
    #[arg(long, value_name = "N")]
    budget_moves: Option<u64>,
    /// Stop the baseline early after N penalty rounds without a new best.
    #[arg(long, value_name = "N")]
    stall_rounds: Option<u64>,
}

impl BaselineStop {
    fn params(&self, strategy: FirstSolutionStrategy) -> anyhow::Result<BaselineParams> {
        let stop = match (self.time_limit, self.budget_moves) {
            (_, Some(n)) => StopRule::Moves(n),
            (Some(s), None) => {
                StopRule::TimeLimit(Duration::try_from_secs_f64(s).map_err(|_| anyhow!("invalid --time-limit {s}"))?)
            }
            (None, None) => BaselineParams::default().stop,
        };
        let params = BaselineParams { strategy, stop, stall_rounds: self.stall_rounds, ..Default::default() };
        params.validate()?;
        Ok(params)
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    solver: SolverKind,
    #[arg(long, value_enum, default_value = "exploitation", conflicts_with = "strategy")]
    preset: PresetArg,
    #[arg(long, value_enum, default_value = "auto")]
    strategy: StrategyArg,
    #[command(flatten)]
    stop: BaselineStop,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Convergence CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    geojson: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    /// Report JSON with every run and the aggregates.
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
    #[arg(long, default_value = "report.txt")]
    table: PathBuf,
    /// Solvers to compare, in table column order.
    #[arg(long, value_delimiter = ',', default_value = "exploration,exploitation,baseline")]
    solvers: Vec<String>,
    #[arg(long, value_enum, default_value = "auto")]
    strategy: StrategyArg,
    #[command(flatten)]
    stop: BaselineStop,
    /// Write one convergence CSV per solver and run into this directory.
    #[arg(long)]
    trace_dir: Option<PathBuf>,
    /// Run repetitions concurrently; timings are then marked as non-protocol.
    #[arg(long)]
    parallel: bool,
}

#[derive(Args)]
struct GenArgs {
    /// Number of customers.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    vehicles: usize,
    #[arg(long)]
    capacity: f64,
    /// Cluster count; omit for a uniform layout.
    #[arg(long)]
    clusters: Option<usize>,
    /// Cluster standard deviation in km.
    #[arg(long, default_value_t = 2.0)]
    spread: f64,
    /// LAT1,LON1,LAT2,LON2. Defaults to a box around Greater Cairo.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    bbox: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the distance matrix and reference it from the instance.
    #[arg(long)]
    matrix: Option<PathBuf>,
}

/// Failure classes map to the process exit code.
enum Failure {
    Infeasible(anyhow::Error),
    Format(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Infeasible(_) => 1,
            Failure::Format(_) => 2,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Format(e)
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::RunFailed { .. } => Failure::Infeasible(e.into()),
            other => Failure::Format(other.into()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => solve(args),
        Command::Bench(args) => bench(args),
        Command::Gen(args) => gen(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let (Failure::Infeasible(e) | Failure::Format(e)) = &failure;
            eprintln!("error: {e:#}");
            ExitCode::from(failure.code())
        }
    }
}

fn load(path: &Path) -> Result<Instance, Failure> {
    let instance = load_instance(path)?;
    for w in instance_warnings(&instance) {
        eprintln!("warning: {w}");
    }
    Ok(instance)
}

fn solve(args: SolveArgs) -> Result<(), Failure> {
    let instance = load(&args.instance)?;
    let config = match args.solver {
        SolverKind::Aco => {
            let preset = Preset::from(args.preset);
            let mut config = SolverConfig::aco_preset(preset);
            if let SolverConfig::Aco { params, .. } = &mut config {
                *params = params.clone().with_seed(args.seed);
                params.validate().map_err(anyhow::Error::from)?;
            }
            config
        }
        SolverKind::Baseline => SolverConfig::baseline(args.stop.params(args.strategy.into())?),
    };
    let (solution, rows) =
        timed_solve(&instance, &config, args.seed, 0, &mut |_| {}).map_err(|m| Failure::Infeasible(anyhow!(m)))?;
    let record = SolutionRecord::new(instance.name(), &solution, config.params_json());
    export_solution(&record, &args.out)?;
    if let Some(path) = &args.trace {
        export_trace(&rows, path)?;
    }
    if let Some(path) = &args.geojson {
        export_geojson(&instance, &solution, path)?;
    }
    println!(
        "{}: {:.3} km over {} routes in {:.3}s",
        config.label(),
        solution.total_distance,
        solution.routes.len(),
        solution.meta.wall_time_s
    );
    Ok(())
}

fn bench_solver(name: &str, args: &BenchArgs) -> Result<SolverConfig, Failure> {
    Ok(match name.trim() {
        "exploitation" => SolverConfig::aco_preset(Preset::Exploitation),
        "exploration" => SolverConfig::aco_preset(Preset::Exploration),
        "baseline" => SolverConfig::baseline(args.stop.params(args.strategy.into())?),
        other => return Err(anyhow!("unknown solver {other:?}; use exploration, exploitation or baseline").into()),
    })
}

fn bench(args: BenchArgs) -> Result<(), Failure> {
    if args.runs == 0 {
        return Err(anyhow!("--runs must be at least 1").into());
    }
    let configs = args.solvers.iter().map(|s| bench_solver(s, &args)).collect::<Result<Vec<_>, _>>()?;
    let instance = load(&args.instance)?;
    if let Some(dir) = &args.trace_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut reports = Vec::new();
    for (name, config) in args.solvers.iter().zip(&configs) {
        eprintln!("running {} x{}", config.label(), args.runs);
        let outcome = run_experiment_on(&instance, config, args.runs, args.seed_base, args.parallel, |_| {})?;
        if let Some(dir) = &args.trace_dir {
            for (run, rows) in outcome.trace.runs.iter().enumerate() {
                export_trace(rows, dir.join(format!("{}-run{run}.csv", name.trim())))?;
            }
        }
        reports.push(outcome.report);
    }
    let json = to_canonical_string(&reports)?;
    std::fs::write(&args.out, json).with_context(|| format!("writing {}", args.out.display()))?;
    let table = format_table(&reports);
    std::fs::write(&args.table, &table).with_context(|| format!("writing {}", args.table.display()))?;
    print!("{table}");
    Ok(())
}

fn gen(args: GenArgs) -> Result<(), Failure> {
    let bbox = match args.bbox.as_deref() {
        None => BoundingBox::cairo(),
        Some(&[lat1, lon1, lat2, lon2]) => BoundingBox::new(lat1, lon1, lat2, lon2),
        Some(_) => return Err(anyhow!("--bbox takes LAT1,LON1,LAT2,LON2").into()),
    };
    let layout = match args.clusters {
        Some(clusters) => Layout::Clustered { clusters, spread_km: args.spread },
        None => Layout::Uniform,
    };
    let spec = GeneratorSpec {
        customers: args.n,
        vehicles: args.vehicles,
        capacity: args.capacity,
        layout,
        bbox,
        seed: args.seed,
    };
    let instance = generate_instance(&spec)?;
    let matrix_ref = match &args.matrix {
        Some(path) => {
            save_matrix(instance.matrix(), path).with_context(|| format!("writing {}", path.display()))?;
            Some(matrix_reference(&args.out, path)?)
        }
        None => None,
    };
    save_instance(&instance, &args.out, matrix_ref.as_deref())?;
    println!("wrote {} ({} customers, {} vehicles)", args.out.display(), instance.num_customers(), args.vehicles);
    Ok(())
}

/// Path to the matrix as stored in the instance file: relative when both files
/// share a directory, absolute otherwise.
fn matrix_reference(instance: &Path, matrix: &Path) -> anyhow::Result<String> {
    let dir_of = |p: &Path| p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new(".")).to_path_buf();
    let same_dir = std::fs::canonicalize(dir_of(instance)).ok() == std::fs::canonicalize(dir_of(matrix)).ok();
    let name = matrix.file_name().ok_or_else(|| anyhow!("--matrix needs a file name"))?;
    let reference = if same_dir { PathBuf::from(name) } else { std::fs::canonicalize(matrix)? };
    reference.to_str().map(str::to_string).ok_or_else(|| anyhow!("matrix path is not UTF-8"))
}
