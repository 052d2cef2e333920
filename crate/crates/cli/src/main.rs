mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Library(#[from] levysig::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Parser)]
#[command(name = "levysig", version, about = "Signature methods for Lévy-driven market models")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML run configuration.
    #[arg(long, global = true, default_value = "levysig.toml")]
    pub config: PathBuf,
    /// Directory for CSV outputs (created if missing).
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// Replaces `[simulation] seed`.
    #[arg(long, global = true)]
    pub seed_override: Option<u64>,
    /// Worker threads for Monte Carlo; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Print the run summary as JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Expected signature of the configured process, with a Monte Carlo check when `paths > 0`.
    ExpectedSig,
    /// Analytic and Monte Carlo prices of the configured payoffs.
    Price,
    /// Hedge of the first payoff along one simulated path, plus hedging P&L statistics.
    Hedge,
    /// Writes simulated primary and model paths.
    Simulate,
    /// Fits a linear signature functional to a path-dependent target.
    Fit,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.common.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let cfg = config::Config::load(&cli.common.config)?;
    std::fs::create_dir_all(&cli.common.out_dir)?;
    let summary = commands::dispatch(cli.command, &cfg, &cli.common)?;
    if cli.common.json {
        println!("{}", serde_json::to_string_pretty(&summary)?);
    } else {
        print_text(&summary);
    }
    Ok(())
}

fn print_text(value: &serde_json::Value) {
    if let serde_json::Value::Object(map) = value {
        for (k, v) in map {
            match v {
                serde_json::Value::String(s) => println!("{k}: {s}"),
                other => println!("{k}: {other}"),
            }
        }
    }
}
