//! `ancdm`: differential analog-network-coding link experiments.
//!
//! Each subcommand runs one experiment and writes CSV. Configuration comes
//! from an optional key-value file; `--seed` overrides the file, the
//! subcommand picks the experiment. Exit codes: 0 success, 2 configuration
//! error, 3 numeric failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ancdm::harness::{self, Experiment, ExperimentConfig};
use ancdm::Error;

#[derive(Parser)]
#[command(
    name = "ancdm",
    version,
    about = "Two-way relay link simulator with differential modulation and no channel knowledge"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo BER over the SNR grid for the configured detectors
    BerSweep(RunArgs),
    /// BER against the source/relay power ratio under the total-power budget
    LambdaSweep(RunArgs),
    /// Normalized mean square error of the blind gain estimate per SNR point
    MseMu(RunArgs),
    /// BER with and without constellation rotation, on shared randomness
    RotationCompare(RunArgs),
    /// Analytic table: high-SNR BER, numeric BER integral, optimal power split
    Analytic(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file, one `key = value` per line
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (64-bit), overriding the config file
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on this
    #[arg(long)]
    workers: Option<usize>,
}

fn build_config(args: &RunArgs, experiment: Experiment) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::Config(format!("cannot read config {}: {e}", path.display()))
            })?;
            harness::parse_config(&text)?
        }
        None => ExperimentConfig::default(),
    };
    cfg.experiment = experiment;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(args: &RunArgs, experiment: Experiment) -> Result<(), Error> {
    let cfg = build_config(args, experiment)?;
    #[cfg(feature = "parallel")]
    if let Some(workers) = args.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot configure {workers} workers: {e}")))?;
    }
    #[cfg(not(feature = "parallel"))]
    if args.workers.is_some() {
        eprintln!("note: built without the 'parallel' feature, --workers has no effect");
    }
    let rows = harness::run(&cfg)?;
    let csv = harness::to_csv(&rows);
    match &args.out {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, experiment) = match &cli.command {
        Command::BerSweep(a) => (a, Experiment::BerSweep),
        Command::LambdaSweep(a) => (a, Experiment::LambdaSweep),
        Command::MseMu(a) => (a, Experiment::MseMu),
        Command::RotationCompare(a) => (a, Experiment::RotationCompare),
        Command::Analytic(a) => (a, Experiment::Analytic),
    };
    match execute(args, experiment) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
