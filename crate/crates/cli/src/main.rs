mod commands;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use oscispec_core::Error;
use std::path::PathBuf;
use std::process::ExitCode;

/// Spectral and inverse-spectral computations for -ψ″ + x²ψ + qψ on the half-line.
#[derive(Parser, Debug)]
#[command(name = "oscispec", version)]
pub struct Cli {
    #[command(flatten)]
    pub opts: Options,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Options {
    /// Potential file (.json or .csv); bare names are also looked up in $OSCISPEC_FIXTURES.
    #[arg(long, global = true, value_name = "FILE")]
    pub potential: Option<PathBuf>,
    /// dirichlet or robin:B.
    #[arg(long, global = true, default_value = "dirichlet")]
    pub boundary: String,
    /// Number of modes.
    #[arg(long, global = true, value_name = "N")]
    pub modes: Option<usize>,
    /// Series order (hardy-transform) or Hermite coefficient count (invert).
    #[arg(long, global = true, value_name = "K")]
    pub order: Option<usize>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Solver tolerance (forward) or residual target (invert).
    #[arg(long, global = true, value_name = "X")]
    pub tol: Option<f64>,
    /// Inward starting point of the shooting (forward) or extent of CSV potential output.
    #[arg(long, global = true, value_name = "X")]
    pub xmax: Option<f64>,
    /// Validate the inputs and stop.
    #[arg(long, global = true)]
    pub dry_run: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Eigenvalues, norming constants and r coordinates.
    Forward,
    /// Run identity checks; exit 1 when any fails.
    Verify {
        /// traces, gradients, hardy, darboux or all.
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Shift one norming constant by an isospectral flow.
    Darboux {
        /// Index of the mode whose norming constant moves.
        #[arg(long)]
        mode: usize,
        /// Flow parameter.
        #[arg(long, allow_hyphen_values = true)]
        time: f64,
    },
    /// Reconstruct a potential from spectral data.
    Invert {
        /// Spectral data JSON as written by `forward`.
        #[arg(long, value_name = "FILE")]
        data: PathBuf,
        #[arg(long, default_value_t = 25)]
        max_iter: usize,
        /// Skip the final Darboux polish.
        #[arg(long)]
        no_polish: bool,
    },
    /// Free-problem constants per mode.
    WeberTable,
    /// Generating functions and derived sequences of q.
    HardyTransform,
}

fn exit_code(e: &Error) -> u8 {
    if e.is_input() {
        2
    } else {
        3
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("oscispec: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
