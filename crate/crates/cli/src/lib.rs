//! Command-line front end for `fermicorr`.
//!
//! Every command is deterministic under `--seed`, writes its data files to
//! `--out` and finishes with a `manifest.json` listing the SHA-256 digest of
//! each file it wrote. Exit codes: 0 success, 1 property-suite failure,
//! 2 usage or parse error, 3 numerical failure.

pub mod commands;
pub mod error;
pub mod output;
pub mod statefile;
pub mod suites;

use clap::{Args, Parser, Subcommand, ValueEnum};
use error::{CliError, CliResult};
use fermicorr::quantinfo::LogBase;
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "fermicorr", version, about = "Quantumness of correlations for fermionic modes")]
pub struct Cli {
    #[command(flatten)]
    pub shared: Shared,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Shared {
    /// Seed of every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: available cores); results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Logarithm base of reported entropies: 2 (bits) or e (nats).
    #[arg(long = "log-base", global = true, value_enum, default_value_t = Base::Two)]
    pub log_base: Base,
    /// Output directory.
    #[arg(long, global = true, default_value = "fermicorr-out")]
    pub out: PathBuf,
    /// Data file format (default: csv for tables, json for single results).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Base {
    #[value(name = "2")]
    #[serde(rename = "2")]
    Two,
    #[value(name = "e")]
    #[serde(rename = "e")]
    E,
}

impl Base {
    pub fn unit(self) -> LogBase {
        match self {
            Base::Two => LogBase::Bits,
            Base::E => LogBase::Nats,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a quantifier on a state given in a spec file.
    Quantumness(commands::quantumness::QuantumnessArgs),
    /// Integrate the dissipative chain and record purity, quantumness and entanglement.
    Evolve(commands::evolve::EvolveArgs),
    /// Monte-Carlo landscape T_E(φ, θ) and quantumness histogram.
    Landscape(commands::landscape::LandscapeArgs),
    /// Run a property suite and report per-property status.
    Check(commands::check::CheckArgs),
}

/// Runs a parsed command line; the caller maps errors to exit codes.
pub fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.shared.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // a pool that already exists (library use) is kept
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::Quantumness(a) => commands::quantumness::run(&cli.shared, a),
        Command::Evolve(a) => commands::evolve::run(&cli.shared, a),
        Command::Landscape(a) => commands::landscape::run(&cli.shared, a),
        Command::Check(a) => commands::check::run(&cli.shared, a),
    }
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/reproducibility.md")]
    mod reproducibility {}
}
