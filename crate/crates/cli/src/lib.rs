//! Batch driver for the `cyma` solver: solve, verify, export and inspect
//! subgradients from a JSON config.

pub mod artifact;
pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use commands::Outcome;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "cyma",
    version,
    about = "Weyl-invariant Monge-Ampère solver for Ricci-flat potentials"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the problem in a config and write the solution files.
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check a solution file against the tolerances in a config.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        solution: PathBuf,
    },
    /// Print the subgradient set of a built-in convex function.
    Subgradient {
        /// ex33, ex34, ex35, norm, half-square or eguchi-hanson.
        #[arg(long)]
        fixture: String,
        /// Comma-separated coordinates, e.g. 1,0.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Print a solution file as CSV or JSON.
    Export {
        #[arg(long)]
        solution: PathBuf,
        #[arg(long, value_enum)]
        format: FormatArg,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    use commands::ExportFormat;
    match cli.command {
        Command::Solve { config } => commands::solve(&config::Loaded::read(&config)?),
        Command::Verify { config, solution } => commands::verify(&config::Loaded::read(&config)?, &solution),
        Command::Subgradient { fixture, point } => {
            let p = commands::parse_point(&point).map_err(|m| CliError::Invalid(cyma::Error::Parse(m)))?;
            commands::subgradient(&fixture, &p)
        }
        Command::Export { solution, format } => commands::export(
            &solution,
            match format {
                FormatArg::Csv => ExportFormat::Csv,
                FormatArg::Json => ExportFormat::Json,
            },
        ),
    }
}

/// Caps the global thread pool from `MA_CY_THREADS`, if set.
pub fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("MA_CY_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("MA_CY_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}
