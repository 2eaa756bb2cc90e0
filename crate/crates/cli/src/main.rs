mod commands;
mod failure;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use failure::Failure;

/// Monte Carlo checks of Gaussian min-max comparisons for the cone-constrained LASSO.
#[derive(Debug, Parser)]
#[command(name = "cgmt-lab", version, about)]
struct Cli {
    /// Worker threads for trial-level parallelism. CGMT_LAB_THREADS takes precedence.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form error prediction from (n, m, k, sigma) or explicit (gamma_m, omega, sigma, m).
    Predict {
        config: PathBuf,
    },
    /// Gaussian width table as CSV on standard output.
    Width {
        config: PathBuf,
    },
    /// Run any experiment kind and write its artifacts.
    Experiment(RunArgs),
    /// Run a tail_comparison experiment.
    CompareTails(RunArgs),
    /// Run a concentration_smin, concentration_phi or lipschitz_check experiment.
    Concentration(RunArgs),
    /// Print the tool version.
    Version,
}

#[derive(Debug, Args)]
struct RunArgs {
    config: PathBuf,

    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Write report.json. With no format flag, report.json and trials.csv are both written.
    #[arg(long)]
    json: bool,

    /// Write trials.csv (width_table.csv for width runs).
    #[arg(long)]
    csv: bool,

    /// Also write SVG plots for tail_comparison and nse_convergence runs.
    #[arg(long)]
    svg: bool,
}

const THREADS_ENV: &str = "CGMT_LAB_THREADS";

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    let n = match std::env::var(THREADS_ENV) {
        Ok(raw) => Some(
            raw.trim()
                .parse::<usize>()
                .map_err(|_| Failure::input(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?,
        ),
        Err(_) => flag,
    };
    match n {
        Some(0) => Err(Failure::input("thread count must be positive")),
        other => Ok(other),
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    if let Some(n) = thread_count(cli.threads)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::internal(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Predict { config } => commands::predict(&config),
        Command::Width { config } => commands::width(&config),
        Command::Experiment(args) => commands::experiment(&args.into(), commands::KindFilter::Any),
        Command::CompareTails(args) => commands::experiment(&args.into(), commands::KindFilter::Tails),
        Command::Concentration(args) => commands::experiment(&args.into(), commands::KindFilter::Concentration),
        Command::Version => {
            println!("cgmt-lab {}", cgmt_core::VERSION);
            Ok(0)
        }
    }
}

impl From<RunArgs> for commands::RunRequest {
    fn from(a: RunArgs) -> Self {
        let any = a.json || a.csv;
        commands::RunRequest {
            config: a.config,
            out: a.out,
            json: a.json || !any,
            csv: a.csv || !any,
            svg: a.svg,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.code)
        }
    }
}
