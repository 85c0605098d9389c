//! `pinchlab`: catalog, solve, verify, refute and sweep scenarios of
//! rotationally symmetric exterior domains.

mod commands;
mod config;
mod suites;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ScenarioArgs, Suite};
use suites::Fault;

/// Exit code for malformed invocations and configs.
const EXIT_USAGE: u8 = 64;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config, or metric parameters (exit 64).
    Usage(String),
    /// The scenario violates a mathematical precondition (exit 2).
    Precondition(String),
    /// A check failed or a computation broke down (exit 1).
    Failure(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Precondition(_) => 2,
            CliError::Failure(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Precondition(m) | CliError::Failure(m) => m,
        }
    }
}

impl From<pinchlab_core::Error> for CliError {
    fn from(e: pinchlab_core::Error) -> Self {
        use pinchlab_core::Error as E;
        match e {
            E::Nonparabolic { .. } => CliError::Precondition(e.to_string()),
            E::Numeric(_) => CliError::Failure(e.to_string()),
            E::Domain { .. } | E::InvalidParameter { .. } | E::Usage(_) | E::Table(_) => {
                CliError::Usage(e.to_string())
            }
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "pinchlab",
    version,
    about = "Level-set functionals of the capacitary potential on warped-product 3-manifolds"
)]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List metric kinds and their parameters.
    Catalog {
        /// Print the schema as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Solve for the potential and write the functional series and a summary.
    Solve {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Series CSV (default: series.csv).
        #[arg(long, value_name = "FILE")]
        csv: Option<std::path::PathBuf>,
        /// Summary JSON (default: summary.json).
        #[arg(long, value_name = "FILE")]
        summary: Option<std::path::PathBuf>,
    },
    /// Run verification suites and exit 1 if any check fails.
    Verify {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_enum)]
        suite: Option<Suite>,
        /// Run on every entry of the standard catalog instead of one metric.
        #[arg(long)]
        catalog: bool,
        /// Corrupt the computed series before checking it.
        #[arg(long, value_enum)]
        inject_fault: Option<Fault>,
        /// Write the results as JSON.
        #[arg(long, value_name = "FILE")]
        json: Option<std::path::PathBuf>,
    },
    /// Evaluate the hypotheses and the closing exponent comparison.
    Refute {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Report JSON (default: stdout).
        #[arg(long, value_name = "FILE")]
        out: Option<std::path::PathBuf>,
    },
    /// Refute every point of a parameter grid, in parallel.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Grid axis `NAME=v1,v2,...`; NAME is a metric parameter, s0, epsilon or t_max.
        #[arg(long = "grid", value_name = "NAME=VALUES", required = true)]
        grid: Vec<String>,
        /// Rows JSON (default: stdout).
        #[arg(long, value_name = "FILE")]
        out: Option<std::path::PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();

    let result = match cli.command {
        Command::Catalog { json } => commands::catalog(json),
        Command::Solve {
            scenario,
            csv,
            summary,
        } => commands::solve(&scenario, csv, summary),
        Command::Verify {
            scenario,
            suite,
            catalog,
            inject_fault,
            json,
        } => commands::verify(&scenario, suite, catalog, inject_fault, json),
        Command::Refute { scenario, out } => commands::refute(&scenario, out),
        Command::Sweep {
            scenario,
            grid,
            out,
        } => commands::sweep(&scenario, &grid, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pinchlab: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
