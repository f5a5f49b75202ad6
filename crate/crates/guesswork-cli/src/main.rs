//! Command-line surface for the guesswork analytics library.
//!
//! Subcommands: `ingest`, `tilt`, `moments`, `exponents`, `markov`,
//! `zipf`, `simulate`, `report`. Global flags: `--config <json>`,
//! `--seed <u64>`, `--out <dir>`, `--bits`, `--verify`.
//!
//! Exit codes: 0 success, 1 computation or verification failure, 2 input
//! error. Every run writes a `resolved_config.json` echo of the merged
//! parameters into the output directory; given the same config and seed,
//! all outputs are byte-identical.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod error;
mod output;
mod schema;

use error::{CliError, CliResult};
use output::{OutDir, Unit};

#[derive(Parser)]
#[command(name = "guesswork", version, about = "Brute-force guesswork analytics and attack simulation")]
struct Cli {
    /// JSON run config; command-line flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed for all randomized work
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (created if missing)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Report entropies, exponents, and log-moments in bits instead of nats
    #[arg(long, global = true)]
    bits: bool,

    /// Cross-check analytic results against brute-force oracles and fail
    /// on disagreement
    #[arg(long, global = true)]
    verify: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest a frequency file (password<TAB>count per line) into a
    /// canonical PMF JSON
    Ingest(commands::ingest::IngestArgs),
    /// Exponentially tilt a distribution
    Tilt(commands::tilt::TiltArgs),
    /// Guesswork moments, bounds, exponents, and the optimal guessing
    /// distribution
    Moments(commands::moments::MomentsArgs),
    /// Breach-probability exponents under a guess budget
    Exponents(commands::exponents::ExponentsArgs),
    /// Markov sources: the optimal guessing chain and its exponent
    Markov(commands::markov::MarkovArgs),
    /// Zipf password models and their optimal guessers
    Zipf(commands::zipf::ZipfArgs),
    /// Monte Carlo attack simulation over strategy/schedule matrices
    Simulate(commands::simulate::SimulateArgs),
    /// Consolidate analytic values against simulation estimates
    Report(commands::report::ReportArgs),
}

/// Top-level layout of the optional `--config` JSON file.
#[derive(Debug, Default, serde::Deserialize)]
struct FileConfig {
    seed: Option<u64>,
    out: Option<PathBuf>,
    bits: Option<bool>,
    verify: Option<bool>,
    #[serde(flatten)]
    sections: serde_json::Map<String, serde_json::Value>,
}

/// Globals resolved from flags and the config file.
pub struct Context {
    pub out: OutDir,
    pub out_path: PathBuf,
    pub unit: Unit,
    pub seed: u64,
    pub verify: bool,
    sections: serde_json::Map<String, serde_json::Value>,
}

impl Context {
    /// The typed config section for a subcommand, if present.
    pub fn section<T: serde::de::DeserializeOwned + Default>(&self, name: &str) -> CliResult<T> {
        match self.sections.get(name) {
            None => Ok(T::default()),
            Some(v) => serde_json::from_value(v.clone())
                .map_err(|e| CliError::input(format!("config section {name:?}: {e}"))),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct NoArgs {}

fn build_context(cli: &Cli) -> CliResult<Context> {
    let file: FileConfig = match &cli.config {
        None => FileConfig::default(),
        Some(path) => {
            let bytes = std::fs::read(path)
                .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_slice(&bytes)
                .map_err(|e| CliError::input(format!("cannot parse {}: {e}", path.display())))?
        }
    };
    let out_path = cli
        .out
        .clone()
        .or(file.out)
        .unwrap_or_else(|| PathBuf::from("guesswork-out"));
    Ok(Context {
        out: OutDir::create(&out_path)?,
        out_path,
        unit: Unit::from_flag(cli.bits || file.bits.unwrap_or(false)),
        seed: cli.seed.or(file.seed).unwrap_or(0),
        verify: cli.verify || file.verify.unwrap_or(false),
        sections: file.sections,
    })
}

fn run(cli: Cli) -> CliResult<()> {
    let ctx = build_context(&cli)?;
    match cli.command {
        Command::Ingest(args) => commands::ingest::run(&ctx, args),
        Command::Tilt(args) => commands::tilt::run(&ctx, args),
        Command::Moments(args) => commands::moments::run(&ctx, args),
        Command::Exponents(args) => commands::exponents::run(&ctx, args),
        Command::Markov(args) => commands::markov::run(&ctx, args),
        Command::Zipf(args) => commands::zipf::run(&ctx, args),
        Command::Simulate(args) => commands::simulate::run(&ctx, args),
        Command::Report(args) => commands::report::run(&ctx, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code as u8)
        }
    }
}
