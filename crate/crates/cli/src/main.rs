//! `smoothiso` command-line tool.
//!
//! Exit codes: 0 success, 2 unknown subcommand, 3 invalid configuration,
//! 4 runtime failure, 10 when `test` rejects monotonicity.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use commands::{Outcome, Session};
use config::ConfigError;

#[derive(Debug, Parser)]
#[command(name = "smoothiso", version, about = "Smooth isotonic estimation experiments")]
struct Cli {
    /// JSON config file; command-line flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (standard output when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0: all cores). Does not change results.
    #[arg(long, global = true, env = "SMOOTHISO_WORKERS")]
    workers: Option<usize>,
    /// Master seed; a fresh one is generated and printed when absent.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate an estimator on a grid (CSV `t,value`).
    Estimate(commands::EstimateFlags),
    /// L_p (and, for densities, Hellinger) errors of all estimators on one sample.
    Errors(commands::ErrorsFlags),
    /// Limiting constants of a scenario as flat JSON.
    Constants(commands::ConstantsFlags),
    /// Standardized L_p errors across replications.
    Clt(commands::CltFlags),
    /// Distance between the smoothed Grenander and the kernel estimator.
    Sgdist(commands::SgdistFlags),
    /// Scaled boundary errors with and without boundary kernels.
    Boundary(commands::BoundaryFlags),
    /// Concave-majorant gap of Brownian motion with parabolic drift.
    Chernoff(commands::ChernoffFlags),
    /// Bootstrap test of monotonicity on a sample.
    Test(commands::TestFlags),
    /// Rejection rate of the test on simulated data (CSV row).
    Power(commands::PowerFlags),
}

fn run(cli: Cli) -> Result<Outcome> {
    let file = cli.config.as_deref().map(config::load_file).transpose()?;
    let session = Session {
        file,
        seed: cli.seed,
        out: cli.out,
    };
    let workers = cli.workers.unwrap_or(0);
    smoothiso::mc::with_workers(workers, || match &cli.command {
        Command::Estimate(f) => commands::estimate(&session, f),
        Command::Errors(f) => commands::errors(&session, f),
        Command::Constants(f) => commands::constants(&session, f),
        Command::Clt(f) => commands::clt(&session, f),
        Command::Sgdist(f) => commands::sgdist(&session, f),
        Command::Boundary(f) => commands::boundary(&session, f),
        Command::Chernoff(f) => commands::chernoff(&session, f),
        Command::Test(f) => commands::test(&session, f),
        Command::Power(f) => commands::power(&session, f),
    })?
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                ErrorKind::InvalidSubcommand
                | ErrorKind::MissingSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 2,
                _ => 3,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Reject) => ExitCode::from(10),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.downcast_ref::<ConfigError>().is_some() { 3 } else { 4 })
        }
    }
}
