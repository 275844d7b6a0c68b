//! `padic-pme`: grid census, symbol arbitration, norms, evolution runs and the
//! verification battery, driven by a TOML config.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 configuration error,
//! 3 solver non-convergence.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Ctx;
use crate::report::Output;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0}")]
    Solver(padic_pme::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "padic-pme",
    version,
    about = "p-adic porous medium equation toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment config; built-in defaults when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for the JSON report and CSV tables
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppress the console summary
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cell count, lambda_0, shell census and dual-norm histogram
    GridInfo,
    /// Brute-force symbol against the candidate closed forms
    SymbolVerify,
    /// All norm families and equivalence constants for the initial function
    Norms,
    /// Implicit Euler run with per-step diagnostics
    Solve,
    /// H_{-1} distances between trajectories
    Contraction,
    /// Step-size refinement study
    Convergence,
    /// The full verification battery
    Verify,
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    let loaded = config::load(cli.config.as_deref(), cli.seed)?;
    let out = Output::create(&cli.out)?;
    let ctx = Ctx {
        loaded: &loaded,
        out: &out,
        quiet: cli.quiet,
    };
    let report = match cli.command {
        Command::GridInfo => commands::grid_info(&ctx)?,
        Command::SymbolVerify => commands::symbol_verify(&ctx)?,
        Command::Norms => commands::norms(&ctx)?,
        Command::Solve => commands::solve(&ctx)?,
        Command::Contraction => commands::contraction(&ctx)?,
        Command::Convergence => commands::convergence(&ctx)?,
        Command::Verify => commands::verify(&ctx)?,
    };
    commands::finish(&ctx, report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("padic-pme: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
