//! Command-line front end.
//!
//! Exit codes: 0 certified / converged, 10 analysis ran but nothing certified
//! (or the run diverged), 2 configuration or input error, 1 I/O failure.

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::criteria::CriteriaError;
use crate::funcspec::BoundsError;
use crate::logistic::LogisticError;
use crate::simulator::SimError;
use crate::sweep::SweepError;
use config::Format;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NOT_CERTIFIED: i32 = 10;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Criteria(#[from] CriteriaError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Logistic(#[from] LogisticError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => EXIT_IO,
            _ => EXIT_CONFIG,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "neutral-stab",
    version,
    about = "Exponential-stability tests and simulation for scalar neutral delay equations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Problem file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Directory for output files; overrides [output] dir.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Report format; overrides [output] format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Integration step; overrides [simulate] dt.
    #[arg(long)]
    pub dt: Option<f64>,
    /// End time of simulations and of the coefficient sampling window.
    #[arg(long)]
    pub horizon: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate every applicable stability criterion.
    Check(Common),
    /// Integrate the equation and estimate the decay rate.
    Simulate(Common),
    /// Locate criterion thresholds over the [sweep] parameter.
    Sweep(Common),
    /// Fundamental function X(., s).
    Fundamental {
        #[command(flatten)]
        common: Common,
        /// Start time s; overrides [simulate] s, defaults to t0.
        #[arg(long)]
        s: Option<f64>,
    },
}

/// Parse `args` and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Check(c) => commands::check(c),
        Command::Simulate(c) => commands::simulate(c),
        Command::Sweep(c) => commands::sweep(c),
        Command::Fundamental { common, s } => commands::fundamental(common, *s),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
