use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use fiberslice::pipeline::{self, Model, PipelineConfig, Stage};

/// Stress-aligned curved-layer slicing and continuous fiber toolpaths.
#[derive(Parser)]
#[command(name = "fiberslice", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct StageArgs {
    /// Pipeline config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `run.output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; overrides `run.parallelism` (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Element stress tensors from FEA or a CSV.
    Stress(StageArgs),
    /// Trace, select and count principal stress lines.
    Psl(StageArgs),
    /// Solve the guidance field and extract curved layers.
    Slice(StageArgs),
    /// Fiber toolpaths on every layer.
    Paths(StageArgs),
    /// Alignment, thickness and continuity reports.
    Metrics(StageArgs),
    /// All stages in order plus a manifest.
    Run(StageArgs),
    /// Write a bundled model and its config.
    Generate {
        /// bar, twist-bar or bolted-bar.
        #[arg(long)]
        model: String,
        #[arg(long)]
        out: PathBuf,
        /// Approximate element count (twist-bar only).
        #[arg(long)]
        tets: Option<usize>,
    },
}

fn load(args: &StageArgs) -> Result<(PipelineConfig, PathBuf)> {
    let mut cfg = PipelineConfig::load(&args.config)?;
    if let Some(t) = args.threads {
        cfg.run.parallelism = t;
    }
    let out = args.out.clone().unwrap_or_else(|| cfg.run.output.clone());
    Ok((cfg, out))
}

fn stage(args: &StageArgs, stage: Stage) -> Result<()> {
    let (cfg, out) = load(args)?;
    let rec = pipeline::run_stage(&cfg, &out, stage)?;
    for (k, v) in &rec.counts {
        println!("{}: {k} = {v}", rec.name);
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match &cli.command {
        Command::Stress(a) => stage(a, Stage::Stress),
        Command::Psl(a) => stage(a, Stage::Psl),
        Command::Slice(a) => stage(a, Stage::Slice),
        Command::Paths(a) => stage(a, Stage::Paths),
        Command::Metrics(a) => stage(a, Stage::Metrics),
        Command::Run(a) => {
            let (cfg, out) = load(a)?;
            let manifest = pipeline::run(&cfg, &out)?;
            for rec in &manifest.stages {
                for (k, v) in &rec.counts {
                    println!("{}: {k} = {v}", rec.name);
                }
            }
            println!("artifacts in {}", out.display());
            Ok(())
        }
        Command::Generate { model, out, tets } => {
            let model: Model = model.parse()?;
            let path = pipeline::generate(model, out, *tets)
                .with_context(|| format!("generating {} into {}", model.name(), out.display()))?;
            println!("{}", path.display());
            Ok(())
        }
    }
}
