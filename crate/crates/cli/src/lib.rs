//! Command implementations behind the `choicert` binary.
//!
//! Exit codes: 0 success or conditions satisfied, 1 internal failure or an
//! unconfirmed verification, 2 conditions violated, 3 input or usage error,
//! 4 solver did not converge.

pub mod commands;
pub mod instance;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_VIOLATED: u8 = 2;
pub const EXIT_INPUT: u8 = 3;
pub const EXIT_NOT_CONVERGED: u8 = 4;

/// Environment variable overriding the default tolerance.
pub const TOL_ENV: &str = "CHOICERT_TOL";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl From<choicert::Error> for CliError {
    fn from(e: choicert::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "choicert",
    version,
    about = "Channel nuclear-norm optimization and sign-certificate checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Re-derive the two-qubit counterexample stage by stage.
    VerifyPaper(VerifyArgs),
    /// Check the sign-certificate conditions for the `x` in an instance file.
    Certify(CertifyArgs),
    /// Minimize the nuclear-norm objective for an instance file.
    Solve(SolveArgs),
    /// Search random diagonal instances for violations.
    Search(SearchArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub json: bool,
    /// Shift mass between the first two entries of σ (exercises the failure path).
    #[arg(long, hide = true, allow_hyphen_values = true)]
    pub perturb_sigma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub file: PathBuf,
    /// Relative duality-gap target.
    #[arg(long, default_value_t = 1e-7)]
    pub eps: f64,
    #[arg(long, default_value_t = 20_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_iters: u64,
    /// Skip the closed-form route even when it applies.
    #[arg(long)]
    pub first_order: bool,
    #[arg(long)]
    pub json: bool,
    /// Write the instance with `x` set to the returned channel.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=4))]
    pub dim_z: u64,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=4))]
    pub dim_y: u64,
    /// Write records here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Tolerance from the environment, or the library default.
pub fn tolerance() -> Result<f64, CliError> {
    match std::env::var(TOL_ENV) {
        Err(_) => Ok(choicert::tol::DEFAULT),
        Ok(raw) => match raw.trim().parse::<f64>() {
            Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
            _ => Err(CliError::Input(format!(
                "{TOL_ENV} must be a positive number, got `{raw}`"
            ))),
        },
    }
}

/// Run a parsed command, writing human or JSON output to `out`.
pub fn run(cli: Cli, out: &mut dyn std::io::Write) -> Result<u8, CliError> {
    match cli.command {
        Command::VerifyPaper(a) => commands::verify_paper(&a, out),
        Command::Certify(a) => commands::certify(&a, out),
        Command::Solve(a) => commands::solve(&a, out),
        Command::Search(a) => commands::search(&a, out),
    }
}
