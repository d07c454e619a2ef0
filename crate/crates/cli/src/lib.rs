//! Batch driver for the verification engine: argument parsing, prime-table
//! caching, thread pools and JSON reports.

pub mod commands;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use hl_irred_core::primes::{build_table, read_table_cache, write_table_cache, PrimeTable};
use serde::Serialize;

pub const SCHEMA: &str = "hl-irred/1";

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_MISMATCH: u8 = 2;
pub const EXIT_HORIZON: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] hl_irred_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "hl-irred",
    version,
    about = "Verify irreducibility certificates for G_{1/4} and G_{3/4}"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Prime table cache file; created when missing or too small.
    #[arg(long, global = true)]
    pub table_cache: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "HL_IRRED_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Issue exclusion certificates for every factor degree of G, for a range of n.
    Verify(commands::VerifyArgs),
    /// Maximal gaps between consecutive primes in each class mod 4.
    LemmaGaps(commands::GapArgs),
    /// The window bound L(k, l) and the large-k inequality.
    Bounds(commands::BoundsArgs),
    /// Smooth windows for 2 <= k <= 6.
    Smooth(commands::SmoothArgs),
    /// Cross-check random instances with the mod-p factor-degree oracle.
    Oracle(commands::OracleArgs),
}

/// A finished command: its JSON report and process exit code.
#[derive(Debug)]
pub struct Outcome {
    pub exit: u8,
    pub report: serde_json::Value,
}

impl Outcome {
    pub fn new<T: Serialize>(exit: u8, report: &T) -> CliResult<Self> {
        Ok(Self {
            exit,
            report: serde_json::to_value(report)?,
        })
    }
}

/// Loads a table covering `limit`, going through the cache when configured.
pub fn load_table(limit: u64, cache: Option<&Path>) -> CliResult<PrimeTable> {
    let limit = limit.max(2);
    if let Some(path) = cache {
        if path.exists() {
            let table = read_table_cache(path)?;
            if table.limit() >= limit {
                return Ok(table);
            }
        }
        let table = build_table(limit)?;
        write_table_cache(path, &table)?;
        return Ok(table);
    }
    Ok(build_table(limit)?)
}

pub fn run(cli: &Cli) -> CliResult<Outcome> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build()?;
    let g = &cli.global;
    pool.install(|| match &cli.command {
        Command::Verify(a) => commands::cmd_verify(a, g),
        Command::LemmaGaps(a) => commands::cmd_lemma_gaps(a, g),
        Command::Bounds(a) => commands::cmd_bounds(a, g),
        Command::Smooth(a) => commands::cmd_smooth(a, g),
        Command::Oracle(a) => commands::cmd_oracle(a, g),
    })
}

/// Renders a report deterministically (fixed key order, trailing newline).
pub fn render(report: &serde_json::Value) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn emit(report: &serde_json::Value, out: Option<&Path>) -> CliResult<()> {
    let text = render(report)?;
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
