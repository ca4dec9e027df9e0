//! `patval`: patent technology-valuation pipeline.
//!
//! Five stages, each reading the shared config and writing into one run
//! directory: `extract` -> `train-eval` -> `pareto` -> `explain` ->
//! `report`.

mod commands;
mod config;
mod manifest;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use commands::StageContext;
use config::RunConfig;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "patval", version, about = "Patent technology-valuation pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct StageArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Upgrade per-row parse diagnostics to fatal errors.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the corpus, derive labels, and emit the feature matrix.
    Extract(StageArgs),
    /// Cross-validate the model grid and emit candidate metrics.
    #[command(name = "train-eval")]
    TrainEval(StageArgs),
    /// Screen candidates on the (ECE, MCC) Pareto front and serialize the
    /// selected model.
    Pareto(StageArgs),
    /// Shapley attributions for the selected model, globally and per
    /// confidence bin.
    Explain(StageArgs),
    /// Verify stage integrity and consolidate everything into one report.
    Report(StageArgs),
}

fn stage_context(args: &StageArgs) -> Result<StageContext> {
    let mut config = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let out_dir = match (&args.out, &config.output_dir) {
        (Some(out), _) => out.clone(),
        (None, Some(out)) => out.clone(),
        (None, None) => bail!("no output directory: pass --out or set output_dir in the config"),
    };
    StageContext::new(config, out_dir, args.strict)
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let start = Instant::now();
    let (name, result) = match &cli.command {
        Command::Extract(args) => ("extract", commands::cmd_extract(&stage_context(args)?)),
        Command::TrainEval(args) => ("train-eval", commands::cmd_train_eval(&stage_context(args)?)),
        Command::Pareto(args) => ("pareto", commands::cmd_pareto(&stage_context(args)?)),
        Command::Explain(args) => ("explain", commands::cmd_explain(&stage_context(args)?)),
        Command::Report(args) => ("report", commands::cmd_report(&stage_context(args)?)),
    };
    result?;
    eprintln!("{name}: completed in {:.1}s", start.elapsed().as_secs_f64());
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
