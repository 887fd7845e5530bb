//! `wearscope`: milling-insert wear assessment from tool-microscope photos.
//!
//! The subcommands mirror the pipeline stages: `extract-edges` localizes
//! and crops the cutting edge, `featurize` turns images into texture
//! descriptors, `train` fits the intersection-kernel SVM, `assess` votes
//! per-patch verdicts into a per-insert decision, and `evaluate`/`sweep`
//! score whole corpora into reports.
//!
//! Exit codes: 0 success, 1 processing failure, 2 usage or config error.
//! Usage errors are anything caught before work starts (bad flag values,
//! malformed config, missing manifest or model files); processing failures
//! are runs that started and could not finish.

mod commands;
mod config;
mod pool;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Failure modes that map onto the exit-code contract.
#[derive(Debug)]
pub enum CliError {
    /// Exit 2: the invocation or configuration is wrong; no work ran.
    Usage(String),
    /// Exit 1: the run started but could not finish.
    Failure(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn failure(msg: impl Into<String>) -> Self {
        CliError::Failure(msg.into())
    }
}

#[derive(Parser)]
#[command(
    name = "wearscope",
    version,
    about = "Assess milling-insert wear from tool-microscope photos"
)]
struct Cli {
    /// TOML config file; $WEARSCOPE_CONFIG is the fallback
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Master RNG seed, overriding the config file
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Worker threads for per-image stages (default 1)
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Locate the cutting edge in insert photos and crop it out
    ExtractEdges(commands::ExtractEdgesArgs),
    /// Compute texture descriptors for manifest images
    Featurize(commands::FeaturizeArgs),
    /// Train the wear classifier
    Train(commands::TrainArgs),
    /// Judge the wear state of cutting-edge images with a trained model
    Assess(commands::AssessArgs),
    /// Train on patch images and score edge images into a report
    Evaluate(commands::EvaluateArgs),
    /// Re-score one configuration at every voting threshold
    Sweep(commands::SweepArgs),
}

/// Flags shared by every subcommand, resolved once.
pub struct Global {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let jobs = cli.jobs.unwrap_or(1);
    if jobs == 0 {
        eprintln!("wearscope: --jobs must be at least 1");
        return ExitCode::from(2);
    }
    let global = Global {
        config: cli.config,
        seed: cli.seed,
        jobs,
    };
    let result = match &cli.command {
        Command::ExtractEdges(args) => commands::extract_edges(args, &global),
        Command::Featurize(args) => commands::featurize(args, &global),
        Command::Train(args) => commands::train(args, &global),
        Command::Assess(args) => commands::assess(args, &global),
        Command::Evaluate(args) => commands::evaluate(args, &global),
        Command::Sweep(args) => commands::sweep(args, &global),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Failure(msg)) => {
            eprintln!("wearscope: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("wearscope: {msg}");
            ExitCode::from(2)
        }
    }
}
