//! Command-line harness for the quasi-degenerate open-system simulator:
//! config ingestion, experiment orchestration, and deterministic CSV
//! emission.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{cmd_classical, cmd_mpemba, cmd_simulate, cmd_sweep, cmd_validate, CliError};
use config::ExperimentConfig;

#[derive(Parser)]
#[command(
    name = "mpemba",
    about = "Perturbative spectral analysis and exact propagation for \
             Markovian three-level systems with quasi-degenerate manifolds",
    version
)]
struct Cli {
    /// Experiment configuration (TOML); omit for the canonical defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for CSV files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Promote validity-regime warnings to errors (exit 3).
    #[arg(long, global = true)]
    strict: bool,

    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Reserved for future stochastic components; accepted and ignored.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic (perturbative) trajectory against the Redfield oracle.
    Simulate,
    /// Distance-to-equilibrium curves for the four canonical preparations.
    Mpemba,
    /// The incoherent (secular) three-level control model.
    Classical,
    /// lambda1 exact-vs-perturbative scan over (Delta, T, gamma).
    Sweep,
    /// Run the invariant battery and print one verdict per check.
    Validate,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot configure thread pool: {e}")))?;
    }
    let cfg = ExperimentConfig::load(cli.config.as_deref()).map_err(CliError::Config)?;
    match cli.command {
        Command::Simulate => cmd_simulate(&cfg, &cli.out, cli.strict),
        Command::Mpemba => cmd_mpemba(&cfg, &cli.out, cli.strict),
        Command::Classical => cmd_classical(&cfg, &cli.out, cli.strict),
        Command::Sweep => cmd_sweep(&cfg, &cli.out, cli.strict),
        Command::Validate => cmd_validate(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code() as u8)
        }
    }
}
