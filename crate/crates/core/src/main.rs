use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use mscvrp::bench::{self, SuiteConfig, TimeLimit, Variant};
use mscvrp::features::{export_dataset, FeatureVector};
use mscvrp::instance::{read_bks_table, Instance};
use mscvrp::solution::{gap, Solution};
use mscvrp::solver::{solve, Mode, SolverConfig};

#[derive(Parser)]
#[command(name = "mscvrp", version, about = "Multiple Search solver for the capacitated VRP")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance.
    Solve(SolveArgs),
    /// Run several variants over a directory of instances.
    Bench(BenchArgs),
    /// Append the feature vector of a solution to a CSV dataset.
    Features(FeatureArgs),
    /// One-tailed Wilcoxon test on the average gaps of two reports.
    Compare(CompareArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Seconds.
    #[arg(long, default_value_t = 10.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    guided: bool,
    #[arg(long)]
    no_pr: bool,
    #[arg(long)]
    max_iterations: Option<u64>,
    /// Write the best solution in .sol format.
    #[arg(long)]
    sol_out: Option<PathBuf>,
    /// Write the run trace as JSON.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// CSV of best-known costs (instance,bks) for the gap.
    #[arg(long)]
    bks: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of .vrp files.
    #[arg(long)]
    instances: PathBuf,
    #[arg(long)]
    bks: PathBuf,
    #[arg(long, default_value_t = 5)]
    runs: u64,
    /// Seconds per run.
    #[arg(long, conflicts_with = "time_per_100")]
    time_limit: Option<f64>,
    /// Seconds per 100 customers.
    #[arg(long)]
    time_per_100: Option<f64>,
    #[arg(long, value_delimiter = ',', default_value = "plain,guided")]
    modes: Vec<Variant>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    max_iterations: Option<u64>,
    /// Use only the first K instances in name order.
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct FeatureArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    solution: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    label: Option<u8>,
    /// Dataset to append to; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// Keep only rows of this mode from report a.
    #[arg(long)]
    mode_a: Option<String>,
    #[arg(long)]
    mode_b: Option<String>,
    #[arg(long, default_value_t = bench::DEFAULT_ALPHA)]
    alpha: f64,
}

enum Failure {
    MissingInput(String),
    Runtime(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn require(path: &Path) -> Result<(), Failure> {
    if path.exists() {
        Ok(())
    } else {
        Err(Failure::MissingInput(format!("{} not found", path.display())))
    }
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    require(path)?;
    Instance::from_file(path).map_err(|e| Failure::MissingInput(format!("{}: {e}", path.display())))
}

fn load_bks(path: &Path) -> Result<BTreeMap<String, f64>, Failure> {
    require(path)?;
    read_bks_table(path).map_err(|e| Failure::MissingInput(format!("{}: {e}", path.display())))
}

fn run_solve(args: SolveArgs) -> Result<(), Failure> {
    let instance = load_instance(&args.instance)?;
    let bks = args.bks.as_deref().map(load_bks).transpose()?;
    let mode = if args.guided { Mode::Guided } else { Mode::Plain };
    let mut config = SolverConfig::new(mode, args.time_limit, args.seed);
    config.enable_pr = !args.no_pr;
    config.max_iterations = args.max_iterations;
    let result = solve(&instance, &config).map_err(|e| Failure::MissingInput(e.to_string()))?;
    let mut line = format!(
        "{} cost {} routes {} iterations {}",
        instance.name(),
        result.best_cost,
        result.best.num_routes(),
        result.iterations
    );
    if let Some(reference) = bks.as_ref().and_then(|t| t.get(instance.name())) {
        line.push_str(&format!(" gap {:.2}%", gap(result.best_cost as f64, *reference)));
    }
    println!("{line}");
    if let Some(path) = args.sol_out {
        fs::write(path, result.best.to_sol_string())?;
    }
    if let Some(path) = args.trace {
        let file = File::create(path)?;
        serde_json::to_writer_pretty(file, &result.trace).map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    Ok(())
}

fn run_bench(args: BenchArgs) -> Result<(), Failure> {
    require(&args.instances)?;
    let bks = load_bks(&args.bks)?;
    let mut paths: Vec<PathBuf> = fs::read_dir(&args.instances)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "vrp"))
        .collect();
    paths.sort();
    if let Some(k) = args.limit {
        paths.truncate(k);
    }
    if paths.is_empty() {
        return Err(Failure::MissingInput(format!("no .vrp files in {}", args.instances.display())));
    }
    let instances = paths.iter().map(|p| load_instance(p)).collect::<Result<Vec<_>, _>>()?;
    let time_limit = match (args.time_limit, args.time_per_100) {
        (_, Some(f)) => TimeLimit::PerHundredCustomers(f),
        (Some(s), None) => TimeLimit::Seconds(s),
        (None, None) => TimeLimit::Seconds(60.0),
    };
    let cfg = SuiteConfig {
        variants: args.modes,
        runs: args.runs,
        time_limit,
        jobs: args.jobs,
        max_iterations: args.max_iterations,
    };
    info!("{} instances, {} variants, {} runs", instances.len(), cfg.variants.len(), cfg.runs);
    let report = bench::run_suite(&instances, &bks, &cfg);
    report
        .write_csv(File::create(&args.out)?)
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    if let Some(path) = args.json {
        report
            .write_json(File::create(path)?)
            .map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    for a in &report.aggregates {
        println!(
            "{}: avg gap min {:.2} avg {:.2} median {:.2} max {:.2}; best gap avg {:.2}",
            a.mode, a.avg_gap.min, a.avg_gap.avg, a.avg_gap.median, a.avg_gap.max, a.best_gap.avg
        );
    }
    Ok(())
}

fn run_features(args: FeatureArgs) -> Result<(), Failure> {
    let instance = load_instance(&args.instance)?;
    require(&args.solution)?;
    let text = fs::read_to_string(&args.solution)?;
    let (solution, _) =
        Solution::parse_sol(&instance, &text).map_err(|e| Failure::MissingInput(format!("{}: {e}", args.solution.display())))?;
    solution
        .check(&instance)
        .map_err(|v| Failure::MissingInput(format!("{}: {v}", args.solution.display())))?;
    let row = FeatureVector::compute(&instance, &solution, args.label);
    let csv_err = |e: csv::Error| Failure::Runtime(e.to_string());
    match args.out {
        Some(path) => {
            let fresh = fs::metadata(&path).map(|m| m.len() == 0).unwrap_or(true);
            let file = OpenOptions::new().create(true).append(true).open(path)?;
            export_dataset(file, &[row], fresh).map_err(csv_err)?;
        }
        None => export_dataset(io::stdout().lock(), &[row], true).map_err(csv_err)?,
    }
    Ok(())
}

fn run_compare(args: CompareArgs) -> Result<(), Failure> {
    let read = |path: &Path, mode: &Option<String>| -> Result<Vec<bench::InstanceRow>, Failure> {
        require(path)?;
        let rows = bench::read_rows(File::open(path)?)
            .map_err(|e| Failure::MissingInput(format!("{}: {e}", path.display())))?;
        Ok(rows
            .into_iter()
            .filter(|r| mode.as_ref().map_or(true, |m| &r.mode == m))
            .collect())
    };
    let a = read(&args.a, &args.mode_a)?;
    let b = read(&args.b, &args.mode_b)?;
    let c = bench::compare(&a, &b, args.alpha).map_err(Failure::Runtime)?;
    let mut out = io::stdout().lock();
    writeln!(out, "pairs {} mean avg gap a {:.4} b {:.4}", c.pairs, c.mean_a, c.mean_b)?;
    match &c.test {
        Ok(t) => {
            writeln!(out, "W+ {} n {} p {:.6e} ({:?})", t.statistic, t.n_effective, t.p_value, t.method)?;
            if c.rejects_h0() {
                writeln!(out, "reject H0 at alpha={}", c.alpha)?;
            } else {
                writeln!(out, "fail to reject H0 at alpha={}", c.alpha)?;
            }
        }
        Err(e) => writeln!(out, "no test: {e}")?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Solve(a) => run_solve(a),
        Command::Bench(a) => run_bench(a),
        Command::Features(a) => run_features(a),
        Command::Compare(a) => run_compare(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::MissingInput(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
