//! Command-line front end: reads a JSON config, runs one pipeline and writes
//! its tables plus a `manifest.json` into the output directory.
//!
//! Exit codes: 0 on success, 1 for configuration, input or I/O errors, 2 when
//! a strategy faults or a pool fails admission.

mod commands;
mod config;
mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dilemma_core::GameKind;

pub use config::{
    EvolveConfig, FingerprintConfig, PoolSource, SelfplayConfig, CONFIG_SCHEMA_VERSION,
};
pub use manifest::{OutputEntry, RunManifest};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Fault(String),
    #[error(transparent)]
    Core(#[from] dilemma_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Fault(_) => 2,
            CliError::Core(e) if e.is_strategy_fault() => 2,
            CliError::Core(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "dilemma", version, about = "Iterated N-player social dilemma experiments")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the config's `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (default: `out/<command>`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for the parallel executor.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fingerprint pools, run PCA and write the variation metrics.
    Fingerprint,
    /// Welfare of mixed groups drawn from an exploitative and a collective pool.
    Selfplay {
        /// Overrides `params.k`.
        #[arg(long)]
        k: Option<f64>,
    },
    /// Batches of cultural evolution runs.
    Evolve {
        /// Overrides `params.k`.
        #[arg(long)]
        k: Option<f64>,
    },
    /// Run the admission gate over a policy file.
    Validate {
        pool: PathBuf,
        #[arg(long, default_value = "pgg")]
        game: GameKind,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        rounds: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Print the minimum and maximum achievable mean welfare.
    Bounds {
        #[arg(long)]
        game: GameKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 20)]
        rounds: usize,
        #[arg(long)]
        capacity: Option<f64>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Fingerprint => "fingerprint",
            Command::Selfplay { .. } => "selfplay",
            Command::Evolve { .. } => "evolve",
            Command::Validate { .. } => "validate",
            Command::Bounds { .. } => "bounds",
        }
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    if let Some(t) = cli.common.threads {
        if t == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        dilemma_core::exec::configure_threads(t).map_err(CliError::Config)?;
    }
    let name = cli.command.name();
    match cli.command {
        Command::Fingerprint => commands::fingerprint::run(&cli.common),
        Command::Selfplay { k } => commands::selfplay::run(&cli.common, k),
        Command::Evolve { k } => commands::evolve::run(&cli.common, k),
        Command::Validate {
            pool,
            game,
            n,
            rounds,
            trials,
        } => commands::validate::run(&cli.common, &pool, game, n, rounds, trials),
        Command::Bounds {
            game,
            n,
            k,
            m,
            rounds,
            capacity,
        } => commands::bounds::run(&cli.common, name, game, n, k, m, rounds, capacity),
    }
}

/// Parses `args`, runs the command and reports errors on stderr.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
