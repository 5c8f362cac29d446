//! `gaze-emb`: batch front end for the gaze embedding pipeline.
//!
//! Stages: synth -> prep -> train -> embed/eval -> plot, plus quality.
//! Each stage reads the previous stage's artifacts under `--out` (or the
//! `paths.*` overrides) and writes its own.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

mod commands;
mod config;
mod svg;

use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "gaze-emb",
    version,
    about = "Eye-movement biometric embedding pipeline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate deterministic synthetic gaze recordings
    Synth(StageArgs),
    /// Preprocess recordings into velocity windows
    Prep(StageArgs),
    /// Train the fold models on preprocessed windows
    Train(StageArgs),
    /// Write per-window ensemble embeddings as CSV
    Embed(StageArgs),
    /// Evaluate biometric performance (EER, d-prime, FRR@FAR)
    Eval(StageArgs),
    /// Spatial precision/accuracy of fixation CSVs
    Quality(StageArgs),
    /// Render SVG plots from report and quality CSVs
    Plot(StageArgs),
}

#[derive(Args)]
struct StageArgs {
    /// Flat `key = value` configuration file
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override a single config key (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse(); // usage errors exit 2 via clap

    let args = match &cli.command {
        Command::Synth(a)
        | Command::Prep(a)
        | Command::Train(a)
        | Command::Embed(a)
        | Command::Eval(a)
        | Command::Quality(a)
        | Command::Plot(a) => a,
    };

    let cfg = match RunConfig::load(args.config.as_deref(), &args.set, &args.out) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("gaze-emb: config error: {e:#}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        eprintln!("gaze-emb: cannot create output directory: {e}");
        return ExitCode::from(1);
    }

    let result = match &cli.command {
        Command::Synth(_) => commands::synth::run(&cfg),
        Command::Prep(_) => commands::prep::run(&cfg),
        Command::Train(_) => commands::train::run(&cfg),
        Command::Embed(_) => commands::embed::run(&cfg),
        Command::Eval(_) => commands::eval::run(&cfg),
        Command::Quality(_) => commands::quality::run(&cfg),
        Command::Plot(_) => commands::plot::run(&cfg),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gaze-emb: error: {e:#}");
            ExitCode::from(1)
        }
    }
}
