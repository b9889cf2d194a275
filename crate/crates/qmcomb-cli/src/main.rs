//! Command-line driver for the resonator-delay toolkit.
//!
//! Five subcommands tie the library together: `analyze` samples a circuit's
//! transfer function and delay onto CSV, `optimize` searches block couplings
//! for band flatness, `glue` plans the two-block plateau widening (or the
//! equidistant-comb baseline), `simulate` propagates a pulse through both
//! the time-domain and spectral engines, and `reproduce-figures` emits the
//! reference datasets in one run.
//!
//! Exit codes: `0` success, `2` input or file errors, `3` numeric failures
//! (aliased grids, singular systems, missing roots, unstable steps), `4`
//! optimizer budget exhaustion (the best point seen is still written,
//! flagged `"converged": false`).
//!
//! Every command writes its data files atomically and finishes with a run
//! manifest (`<primary output>.manifest.json`) listing inputs, parameters,
//! and outputs; the manifest is written last, so its presence marks a
//! completed run. Data files are byte-deterministic for identical inputs
//! and flags; the manifest is not (it records wall-clock duration).

// Parameter validation negates comparisons (`!(x > 0.0)`) on purpose: unlike
// the de Morgan rewrite (`x <= 0.0`), the negated form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod io;
mod manifest;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Exit classification for everything that can go wrong after flag parsing.
#[derive(Debug)]
pub enum CliError {
    /// Unusable inputs: missing or malformed files, bad flag syntax,
    /// out-of-contract parameter combinations.
    Input(String),
    /// The model itself refused: aliasing, singularity, missing roots,
    /// stability violations.
    Numeric(qmcomb::Error),
    /// The optimizer ran out of budget; the best-so-far result has already
    /// been written by the command.
    Budget(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Budget(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "{msg}"),
            CliError::Numeric(err) => write!(f, "{err}"),
            CliError::Budget(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<qmcomb::Error> for CliError {
    fn from(err: qmcomb::Error) -> Self {
        match err {
            qmcomb::Error::InvalidParameter(_) => CliError::Input(err.to_string()),
            qmcomb::Error::BudgetExceeded { .. } => CliError::Budget(err.to_string()),
            _ => CliError::Numeric(err),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Input(err.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "qmcomb",
    version,
    about = "Model, optimize, and verify cascaded ring-resonator delay circuits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a circuit's transfer function and delay profile onto CSV.
    Analyze(commands::AnalyzeArgs),
    /// Search block couplings for band flatness; write the result as JSON.
    Optimize(commands::OptimizeArgs),
    /// Plan the two-block gluing shift, or design the equidistant-comb
    /// baseline.
    Glue(commands::GlueArgs),
    /// Propagate a Gaussian pulse through both engines and compare.
    Simulate(commands::SimulateArgs),
    /// Emit the reference datasets (delay curves, couplings, gluing plan)
    /// into a directory in one run.
    ReproduceFigures(commands::ReproduceArgs),
}

/// Execution is serial; the thread cap is validated so scripted pipelines
/// fail loudly on typos instead of silently ignoring the variable.
fn validate_threads_env() -> CliResult<()> {
    match std::env::var("QMCOMB_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => match raw.parse::<usize>() {
            Ok(n) if n >= 1 => {
                if n > 1 {
                    eprintln!(
                        "qmcomb: QMCOMB_THREADS={n} acknowledged; commands run serially, \
                         so the cap has no effect"
                    );
                }
                Ok(())
            }
            _ => Err(CliError::Input(format!(
                "QMCOMB_THREADS must be a positive integer, got {raw:?}"
            ))),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = validate_threads_env().and_then(|()| match cli.command {
        Command::Analyze(args) => commands::analyze(&args),
        Command::Optimize(args) => commands::optimize(&args),
        Command::Glue(args) => commands::glue(&args),
        Command::Simulate(args) => commands::simulate(&args),
        Command::ReproduceFigures(args) => commands::reproduce_figures(&args),
    });
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("qmcomb: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
