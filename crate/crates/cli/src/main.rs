//! Batch front end for the log-gas ensemble engine: parse a TOML run
//! configuration, compute partition or correlation tables, dump the species
//! forms, manage the coefficient cache, and run the self-verification suite.
//!
//! Exit codes: 0 success, 1 invalid configuration or usage, 2 numerical
//! failure (non-convergent quadrature, cap exceeded, I/O), 3 verification
//! failure (failed check or inconsistent cache).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;
mod verify;

#[derive(Debug, Parser)]
#[command(
    name = "loggas",
    version,
    about = "Partition and correlation functions of 1-D multicomponent log-gases"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Partition function of every admissible population, with fugacity
    /// weights and the grand total.
    Partition(RunArgs),
    /// Correlation values on a grid of insertion points.
    Correlate(RunArgs),
    /// Check the engine against the direct-integration oracle and the
    /// internal cross-routes; nonzero exit when any check fails.
    Verify(RunArgs),
    /// Print the coefficients of every species form with their basis
    /// index tuples.
    OmegaDump(RunArgs),
    /// Inspect or clear a coefficient cache file.
    Cache(CacheArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML run configuration (see the schema in the README).
    #[arg(long)]
    config: PathBuf,
    /// Write the output table to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Coefficient cache file; created when absent, reused when present.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Seed for the Monte Carlo oracle (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Use the Monte Carlo oracle instead of nested quadrature.
    #[arg(long)]
    mc: bool,
    /// Re-check oracle quadratures on an unrelated fixed-grid integrator.
    #[arg(long)]
    paranoid: bool,
}

#[derive(Debug, Args)]
struct CacheArgs {
    #[command(subcommand)]
    action: CacheAction,
}

#[derive(Debug, Subcommand)]
enum CacheAction {
    /// List every cached coefficient, sorted by key.
    Inspect {
        #[arg(long)]
        cache: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Remove all entries, leaving a valid empty cache file.
    Clear {
        #[arg(long)]
        cache: PathBuf,
    },
}

/// A command failure with its exit-code category.
#[derive(Debug)]
pub enum Failure {
    /// Invalid configuration, arguments, or an ensemble outside the
    /// supported hypotheses. Exit code 1.
    Config(String),
    /// The computation itself failed: quadrature did not converge, a size
    /// cap was exceeded, or an I/O error occurred. Exit code 2.
    Numerical(String),
    /// A verification check failed or cached data is inconsistent.
    /// Exit code 3.
    Verification(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Numerical(_) => 2,
            Failure::Verification(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numerical(m) | Failure::Verification(m) => m,
        }
    }
}

impl From<loggas_core::Error> for Failure {
    fn from(e: loggas_core::Error) -> Self {
        use loggas_core::Error::*;
        match &e {
            InvalidArgument(_) | InvalidEnsemble(_) | Inadmissible(_) | Unsupported(_) => {
                Failure::Config(e.to_string())
            }
            QuadratureNonConvergence { .. } | CapExceeded(_) | Io(_) => {
                Failure::Numerical(e.to_string())
            }
            Cache(_) => Failure::Verification(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successes; everything else is a usage
            // error and lands on the invalid-config exit code.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Partition(args) => commands::partition(args),
        Command::Correlate(args) => commands::correlate(args),
        Command::Verify(args) => verify::run(args),
        Command::OmegaDump(args) => commands::omega_dump(args),
        Command::Cache(args) => commands::cache(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
