//! `signeq`: coefficient caches and sign-equidistribution experiments.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration error,
//! 3 assertion failure (with `failure.json` in the output directory),
//! 4 missing cache.

mod commands;
mod config;
mod data;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use signeq::qseries::CacheStatus;

use crate::config::{resolve, ConfigArgs};
use crate::data::{load, Loaded};
use crate::output::Writer;

#[derive(Debug)]
pub enum CliError {
    Runtime(String),
    Config(String),
    /// Pretty-printed failure record.
    Assertion(String),
    MissingCache(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Config(_) => 2,
            CliError::Assertion(_) => 3,
            CliError::MissingCache(_) => 4,
        }
    }
}

#[derive(Parser)]
#[command(name = "signeq", version, about = "Sign equidistribution experiments for half-integral weight forms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or verify the coefficient cache.
    Gen(ConfigArgs),
    /// Signs of a(tp²)/χ(p) at primes, per residue class.
    Signs(ConfigArgs),
    /// Sato–Tate statistics of B(p), overall and per class.
    Satotate(ConfigArgs),
    /// Sign counts over n ≡ d (mod q), density estimates, Delange sums.
    Density(ConfigArgs),
    /// Fit C·x^(−α) to the error checkpoints written by `satotate`.
    Fit {
        #[command(flatten)]
        args: ConfigArgs,
        /// Checkpoint CSV; defaults to the one in the output directory.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Run signs, satotate, density and fit and write summary.json.
    Report(ConfigArgs),
}

macro_rules! with_data {
    ($loaded:expr, $d:ident => $body:expr) => {
        match $loaded {
            Loaded::Int($d) => $body,
            Loaded::Cyc($d) => $body,
        }
    };
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(args) => {
            let (cfg, source) = resolve(&args)?;
            let (status, path) = data::generate(&cfg, &source)?;
            let word = match status {
                CacheStatus::Valid => "cache valid",
                CacheStatus::Built => "cache built",
                CacheStatus::Extended => "cache extended",
            };
            println!("{word}: {} (T = {})", path.display(), cfg.truncation);
        }
        Command::Fit { args, input } => {
            let (cfg, _) = resolve(&args)?;
            let w = Writer::new(&cfg)?;
            let input = input.unwrap_or_else(|| w.path(commands::CHECKPOINT_FILE));
            commands::fit(&w, &input)?;
            println!("wrote {}", w.path("fit.json").display());
        }
        Command::Signs(args) => {
            let (cfg, source) = resolve(&args)?;
            let loaded = load(&cfg, source)?;
            let w = Writer::new(&cfg)?;
            with_data!(&loaded, d => commands::signs(&cfg, &w, d))?;
            println!("wrote signs_primes.csv, signs_classes.csv to {}", cfg.out.display());
        }
        Command::Satotate(args) => {
            let (cfg, source) = resolve(&args)?;
            let loaded = load(&cfg, source)?;
            let w = Writer::new(&cfg)?;
            with_data!(&loaded, d => commands::satotate(&cfg, &w, d))?;
            println!("wrote satotate_*.csv to {}", cfg.out.display());
        }
        Command::Density(args) => {
            let (cfg, source) = resolve(&args)?;
            let loaded = load(&cfg, source)?;
            let w = Writer::new(&cfg)?;
            with_data!(&loaded, d => commands::density(&cfg, &w, d))?;
            println!("wrote density*.csv, scatter.csv to {}", cfg.out.display());
        }
        Command::Report(args) => {
            let (cfg, source) = resolve(&args)?;
            let loaded = load(&cfg, source)?;
            let w = Writer::new(&cfg)?;
            let (signs, st, dens) = with_data!(&loaded, d => (
                commands::signs(&cfg, &w, d)?,
                commands::satotate(&cfg, &w, d)?,
                commands::density(&cfg, &w, d)?,
            ));
            let fit = commands::fit(&w, &w.path(commands::CHECKPOINT_FILE))?;
            let path = w.json("summary.json", json!({"signs": signs, "satotate": st, "density": dens, "fit": fit}))?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Assertion(record) => eprintln!("{record}"),
                CliError::Runtime(m) | CliError::Config(m) | CliError::MissingCache(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(e.code())
        }
    }
}
