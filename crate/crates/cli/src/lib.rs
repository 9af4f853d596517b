//! Reproducible, file-based experiment pipelines over `paramlearn`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "paramlearn", version, about = "Learn the best parameter of an algorithm family")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Experiment config (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads; defaults to one per core.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Validate the config and exit.
    #[arg(long, global = true)]
    pub check: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Write the configured instances to `instances.json`.
    Generate,
    /// Dual functions of every instance (`duals.json`, `sweep.csv`).
    Sweep,
    /// ERM on a training sample, scored on a test sample.
    Train,
    /// Continuous weighted majority over instance streams.
    Online,
    /// Dispersion `(w, k)` profile over a grid of radii.
    Dispersion,
    /// Largest shattered subset of a sample.
    Pdim,
    /// Full algorithm output at one parameter.
    Report,
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let cfg = ExperimentConfig::from_path(path)?.resolve(cli.seed)?;
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::Config("--workers must be positive".into()));
        }
        // Fails only if the pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    if cli.check {
        cfg.check()?;
        println!("config ok");
        return Ok(());
    }
    let out = output::OutDir::create(&cli.out)?;
    out.json("config.json", &cfg)?;
    match cli.command {
        Command::Generate => commands::generate(&cfg, &out),
        Command::Sweep => commands::sweep(&cfg, &out),
        Command::Train => commands::train(&cfg, &out),
        Command::Online => commands::online(&cfg, &out),
        Command::Dispersion => commands::dispersion(&cfg, &out),
        Command::Pdim => commands::pdim(&cfg, &out),
        Command::Report => commands::report(&cfg, &out),
    }
}
