//! Command-line front end for PIV robustness analysis: point evaluation,
//! region bounds, contour grids, power tables, the retention-study
//! walkthrough and the oracle checks.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use piv_core::Resolution;

use crate::config::{builtin_config, AnalysisConfig};
pub use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "piv",
    version,
    about = "Probability of rejecting the null again in the ideal sample"
)]
pub struct Cli {
    /// Analysis config (JSON). Defaults to the built-in retention study.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Print the effective config as JSON and exit.
    #[arg(long, global = true)]
    pub dump_config: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// PIV at a point belief.
    Compute {
        #[arg(long)]
        belief: String,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Lower and upper PIV over a region belief, with a robustness verdict.
    Bound {
        #[arg(long)]
        belief: String,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// PIV over a finite region, written as a CSV or JSON grid.
    Contour {
        #[arg(long)]
        belief: String,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Grid size as NTxNC, e.g. 200x200.
        #[arg(long, value_parser = parse_grid)]
        grid: Option<Resolution>,
    },
    /// Null and alternative densities of the retest and a power table.
    Power {
        #[arg(long)]
        belief: String,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Six-step walkthrough of the kindergarten-retention study.
    Replicate {
        #[arg(long, value_name = "PATH", default_value = "replicate_grid.csv")]
        out: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Oracle checks on exact datasets and simulated retests.
    Verify {
        /// Number of random exact-moment specs.
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        /// Replications per simulated belief.
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        /// Base seed for the simulations.
        #[arg(long, default_value_t = 2005)]
        seed: u64,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
}

/// Parses `NTxNC`.
pub fn parse_grid(s: &str) -> std::result::Result<Resolution, String> {
    let (nt, nc) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NTxNC, got `{s}`"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
    let r = Resolution {
        nt: parse(nt)?,
        nc: parse(nc)?,
    };
    if r.nt < 2 || r.nc < 2 {
        return Err(format!("grid must be at least 2x2, got {s}"));
    }
    Ok(r)
}

fn load_config(cli: &Cli) -> Result<AnalysisConfig> {
    match &cli.config {
        Some(path) => AnalysisConfig::load(path),
        None => Ok(builtin_config()),
    }
}

/// Runs the parsed command and returns what it prints on success.
pub fn run(cli: &Cli) -> Result<String> {
    if cli.dump_config {
        return Ok(load_config(cli)?.to_json_pretty());
    }
    let Some(command) = &cli.command else {
        return Err(CliError::Config("no subcommand given (see --help)".into()));
    };
    match command {
        Command::Compute { belief, format } => {
            commands::compute(&load_config(cli)?, belief, *format)
        }
        Command::Bound { belief, format } => commands::bound(&load_config(cli)?, belief, *format),
        Command::Contour {
            belief,
            out,
            format,
            grid,
        } => commands::contour(&load_config(cli)?, belief, *grid, out, *format),
        Command::Power { belief, format } => commands::power(&load_config(cli)?, belief, *format),
        Command::Replicate { out, format } => commands::replicate(out, *format),
        Command::Verify {
            seeds,
            reps,
            seed,
            format,
        } => commands::verify(*seeds, *reps, *seed, *format),
    }
}
