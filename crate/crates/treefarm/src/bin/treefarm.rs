//! Command-line frontend: train trees, generate synthetic datasets, and
//! benchmark build strategies.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use treefarm::bench::{run_bench, BenchPlan};
use treefarm::dataset::{load_data, load_schema, TrainingSet};
use treefarm::synth::{generate, SyntheticSpec};
use treefarm::{
    build_parallel, BuildParams, CostModel, Error, FarmConfig, GrowthParams, SchedulerKind,
    Strategy,
};

#[derive(Parser)]
#[command(name = "treefarm", version, about = "Decision-tree induction with stream-parallel growth")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a tree and write its text form plus a stats line.
    Train(TrainArgs),
    /// Generate a synthetic schema + CSV dataset pair.
    Gen(GenArgs),
    /// Time build configurations and report speedups as CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Seq,
    Np,
    Nap,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::Seq => Strategy::Seq,
            StrategyArg::Np => Strategy::Np,
            StrategyArg::Nap => Strategy::Nap,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SchedulerArg {
    Drr,
    Od,
    Ws,
}

impl From<SchedulerArg> for SchedulerKind {
    fn from(s: SchedulerArg) -> SchedulerKind {
        match s {
            SchedulerArg::Drr => SchedulerKind::Drr,
            SchedulerArg::Od => SchedulerKind::OnDemand,
            SchedulerArg::Ws => SchedulerKind::Weighted,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CostModelArg {
    Alpha,
    Nlogn,
    Nsq,
}

impl CostModelArg {
    fn with_alpha(self, alpha: u64) -> CostModel {
        match self {
            CostModelArg::Alpha => CostModel::Alpha { alpha },
            CostModelArg::Nlogn => CostModel::NLogN,
            CostModelArg::Nsq => CostModel::NSquared,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Schema file (attribute declarations + class line).
    #[arg(long)]
    schema: PathBuf,
    /// CSV data file, class label last, "?" for unknown fields.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "seq")]
    strategy: StrategyArg,
    /// Worker threads for the parallel strategies.
    #[arg(long, default_value_t = 3)]
    workers: usize,
    #[arg(long, value_enum, default_value = "ws")]
    scheduler: SchedulerArg,
    /// Per-worker input queue capacity.
    #[arg(long, default_value_t = 4096)]
    qsize: usize,
    #[arg(long, value_enum, default_value = "nsq")]
    cost_model: CostModelArg,
    /// Case-count threshold of the alpha cost model.
    #[arg(long, default_value_t = 1000)]
    alpha: u64,
    /// Minimum total case weight a node needs to be split.
    #[arg(long, default_value_t = 2.0)]
    min_cases: f64,
    /// Use counting sort for continuous-attribute scans.
    #[arg(long)]
    counting_sort: bool,
    /// Write the tree text here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 10_000)]
    cases: usize,
    #[arg(long, default_value_t = 6)]
    continuous: usize,
    #[arg(long, default_value_t = 3)]
    discrete: usize,
    #[arg(long, default_value_t = 2)]
    classes: usize,
    /// Probability that an attribute field is masked as "?".
    #[arg(long, default_value_t = 0.0)]
    unknown_rate: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output prefix: writes <out>.schema and <out>.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Schema file; omit together with --data to generate a dataset instead.
    #[arg(long, requires = "data")]
    schema: Option<PathBuf>,
    #[arg(long, requires = "schema")]
    data: Option<PathBuf>,
    /// Generated dataset size (when no files are given).
    #[arg(long, default_value_t = 100_000)]
    cases: usize,
    #[arg(long, default_value_t = 6)]
    continuous: usize,
    #[arg(long, default_value_t = 3)]
    discrete: usize,
    #[arg(long, default_value_t = 2)]
    classes: usize,
    #[arg(long, default_value_t = 0.0)]
    unknown_rate: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Strategies to time, comma-separated.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = vec![StrategyArg::Seq, StrategyArg::Np, StrategyArg::Nap])]
    strategy: Vec<StrategyArg>,
    /// Worker counts to time, comma-separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![3])]
    workers: Vec<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = vec![SchedulerArg::Ws])]
    scheduler: Vec<SchedulerArg>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = vec![CostModelArg::Nsq])]
    cost_model: Vec<CostModelArg>,
    #[arg(long, default_value_t = 1000)]
    alpha: u64,
    /// Runs per configuration; highest and lowest are discarded.
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 4096)]
    qsize: usize,
    #[arg(long, default_value_t = 2.0)]
    min_cases: f64,
    #[arg(long)]
    counting_sort: bool,
    /// Write the CSV report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write gnuplot-style speedup data here.
    #[arg(long)]
    plot_out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn read_file(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn write_file(path: &Path, content: &str) -> Result<(), Error> {
    fs::write(path, content).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn load_training_set(schema_path: &Path, data_path: &Path) -> Result<TrainingSet, Error> {
    let schema = load_schema(&read_file(schema_path)?)?;
    load_data(&schema, &read_file(data_path)?)
}

fn cmd_train(args: TrainArgs) -> Result<(), Error> {
    let ts = load_training_set(&args.schema, &args.data)?;
    let params = BuildParams {
        strategy: args.strategy.into(),
        farm: FarmConfig {
            workers: args.workers,
            qsize: args.qsize,
            scheduler: args.scheduler.into(),
        },
        cost_model: args.cost_model.with_alpha(args.alpha),
        growth: GrowthParams { min_cases: args.min_cases, counting_sort: args.counting_sort },
    };
    let start = Instant::now();
    let tree = build_parallel(&ts, &params)?;
    let seconds = start.elapsed().as_secs_f64();
    let text = tree.render(&ts);
    match &args.out {
        Some(path) => write_file(path, &text)?,
        None => print!("{text}"),
    }
    println!(
        "nodes={} leaves={} depth={} seconds={:.6}",
        tree.node_count(),
        tree.leaf_count(),
        tree.depth(),
        seconds
    );
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<(), Error> {
    let spec = SyntheticSpec {
        case_count: args.cases,
        continuous_attrs: args.continuous,
        discrete_attrs: args.discrete,
        classes: args.classes,
        unknown_rate: args.unknown_rate,
        seed: args.seed,
    };
    let (schema, csv) = generate(&spec)?;
    let schema_path = args.out.with_extension("schema");
    let csv_path = args.out.with_extension("csv");
    write_file(&schema_path, &schema)?;
    write_file(&csv_path, &csv)?;
    println!(
        "wrote {} and {} ({} cases, {} attributes, {} classes)",
        schema_path.display(),
        csv_path.display(),
        args.cases,
        args.continuous + args.discrete,
        args.classes
    );
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), Error> {
    let ts = match (&args.schema, &args.data) {
        (Some(schema), Some(data)) => load_training_set(schema, data)?,
        _ => {
            let spec = SyntheticSpec {
                case_count: args.cases,
                continuous_attrs: args.continuous,
                discrete_attrs: args.discrete,
                classes: args.classes,
                unknown_rate: args.unknown_rate,
                seed: args.seed,
            };
            let (schema_text, csv_text) = generate(&spec)?;
            let schema = load_schema(&schema_text)?;
            load_data(&schema, &csv_text)?
        }
    };

    let plan = BenchPlan {
        strategies: args.strategy.iter().map(|&s| s.into()).collect(),
        workers: args.workers.clone(),
        schedulers: args.scheduler.iter().map(|&s| s.into()).collect(),
        cost_models: args.cost_model.iter().map(|&m| m.with_alpha(args.alpha)).collect(),
        reps: args.reps,
        qsize: args.qsize,
        growth: GrowthParams { min_cases: args.min_cases, counting_sort: args.counting_sort },
    };
    let report = run_bench(&ts, &plan)?;
    let csv = report.to_csv();
    match &args.out {
        Some(path) => {
            write_file(path, &csv)?;
            println!(
                "wrote {} ({} rows, sequential baseline {:.6}s)",
                path.display(),
                report.rows.len(),
                report.sequential_seconds
            );
        }
        None => print!("{csv}"),
    }
    if let Some(path) = &args.plot_out {
        write_file(path, &report.to_plot_data())?;
    }
    Ok(())
}
