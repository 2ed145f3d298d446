use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use glasscut::bench::{self, Variant};
use glasscut::io::{load_instance, read_solution, write_solution};
use glasscut::model::{Length, Params};
use glasscut::node::GuideKind;
use glasscut::orchestrator::{solve, Algorithm, SolveOptions};
use glasscut::search::Growth;
use glasscut::validator::{validate, waste_leaf_sum};

const OK: u8 = 0;
const FAILED: u8 = 1;
const USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "glasscut", version, about = "Guillotine cutting of defective glass plates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and write the cutting pattern.
    Solve(SolveArgs),
    /// Check a solution file against an instance.
    Validate(ValidateArgs),
    /// Run solver variants over every instance of a directory.
    Bench(BenchArgs),
}

/// Problem parameters; the defaults are the challenge values.
#[derive(Args)]
struct ParamArgs {
    #[arg(long, default_value_t = 6000)]
    plate_width: Length,
    #[arg(long, default_value_t = 3210)]
    plate_height: Length,
    #[arg(long, default_value_t = 100)]
    min1: Length,
    #[arg(long, default_value_t = 3500)]
    max1: Length,
    #[arg(long, default_value_t = 100)]
    min2: Length,
    #[arg(long, default_value_t = 20)]
    min_waste: Length,
    #[arg(long, default_value_t = 100)]
    plate_count: usize,
}

impl ParamArgs {
    fn params(&self) -> Params {
        Params {
            plate_width: self.plate_width,
            plate_height: self.plate_height,
            min1: self.min1,
            max1: self.max1,
            min2: self.min2,
            min_waste: self.min_waste,
            plate_count: self.plate_count,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Instance prefix: `<prefix>_batch.csv`, looked up under $ROADEF_DATA_DIR if not a path.
    #[arg(short, long)]
    prefix: String,
    /// Seconds.
    #[arg(short, long, default_value_t = 180.0)]
    time_limit: f64,
    /// Defaults to `<instance>_solution.csv`.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    threads: usize,
    #[arg(long, value_parser = parse_guide)]
    guide: Option<GuideKind>,
    #[arg(long)]
    growth: Option<Growth>,
    #[arg(long, default_value_t = 2)]
    queue_size_init: usize,
    #[arg(long)]
    no_symmetry: bool,
    #[arg(long, default_value = "auto", value_parser = parse_algorithm)]
    algorithm: Algorithm,
    /// Ignored: every search is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    /// Keep running until the time limit even after a proof of optimality.
    #[arg(long)]
    challenge_compat: bool,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(short, long)]
    prefix: String,
    #[arg(short, long)]
    solution: PathBuf,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    dir: PathBuf,
    /// Seconds per run.
    #[arg(short, long, default_value_t = 180.0)]
    time_limit: f64,
    /// Comma-separated variants: auto, portfolio, dpastar, astar[:g], ibs:g, mbastar:g:growth[:nosym].
    #[arg(long, value_delimiter = ',', default_value = "auto")]
    algos: Vec<Variant>,
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
}

fn parse_guide(s: &str) -> Result<GuideKind, String> {
    GuideKind::from_letter(s).ok_or_else(|| format!("unknown guide `{s}`, expected w, p or a"))
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    Algorithm::from_name(s).ok_or_else(|| format!("unknown algorithm `{s}`"))
}

fn seconds(s: f64) -> Result<Duration, String> {
    Duration::try_from_secs_f64(s).map_err(|e| format!("bad time limit {s}: {e}"))
}

fn run_solve(args: SolveArgs) -> u8 {
    if args.seed.is_some() {
        log::debug!("--seed ignored");
    }
    let time_limit = match seconds(args.time_limit) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return USAGE;
        }
    };
    let instance = match load_instance(&args.prefix, args.params.params()) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("error: {e}");
            return USAGE;
        }
    };
    log::info!(
        "{}: {} items, {} chains, {} defects",
        instance.name,
        instance.item_count(),
        instance.chain_count(),
        instance.defects.iter().map(Vec::len).sum::<usize>()
    );
    let opts = SolveOptions {
        time_limit,
        threads: args.threads,
        guide: args.guide,
        growth: args.growth,
        queue_size_init: args.queue_size_init,
        symmetry: !args.no_symmetry,
        algorithm: args.algorithm,
        challenge_compat: args.challenge_compat,
        ..SolveOptions::default()
    };
    let report = match solve(&instance, &opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return FAILED;
        }
    };
    log::info!("best from {}, proved: {}, elapsed {:.3}s", report.source, report.proved, report.elapsed.as_secs_f64());
    let output = args.output.unwrap_or_else(|| PathBuf::from(format!("{}_solution.csv", instance.name)));
    if let Err(e) = write_solution(&report.tree, &output) {
        eprintln!("error: {e}");
        return FAILED;
    }
    println!("{}", report.summary_line());
    OK
}

fn run_validate(args: ValidateArgs) -> u8 {
    let loaded = load_instance(&args.prefix, args.params.params())
        .and_then(|i| read_solution(&args.solution).map(|t| (i, t)));
    let (instance, tree) = match loaded {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return USAGE;
        }
    };
    let report = validate(&instance, &tree);
    for v in &report.violations {
        println!("{v}");
    }
    if report.is_feasible() {
        println!("feasible, objective {}", tree.objective(&instance));
        OK
    } else {
        println!(
            "infeasible: {} violations, waste leaves {}",
            report.violations.len(),
            waste_leaf_sum(&tree)
        );
        FAILED
    }
}

fn run_bench(args: BenchArgs) -> u8 {
    let time_limit = match seconds(args.time_limit) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return USAGE;
        }
    };
    match bench::run(&args.dir, time_limit, &args.algos, &args.out) {
        Ok(rows) => {
            for r in &rows {
                println!("{}", r.to_csv());
            }
            if rows.iter().all(|r| r.waste.is_some()) {
                OK
            } else {
                FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            USAGE
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Solve(a) => run_solve(a),
        Command::Validate(a) => run_validate(a),
        Command::Bench(a) => run_bench(a),
    };
    ExitCode::from(code)
}
