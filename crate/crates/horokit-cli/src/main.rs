use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use horokit_cli::config::ExperimentConfig;
use horokit_cli::failure::{self, Failure};
use horokit_cli::{execute, Command};

/// Cauchy–Radon and horospherical transforms on quadrics.
#[derive(Parser)]
#[command(name = "horokit", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Forward transforms over the configured sections.
    Transform(Common),
    /// Reconstruction at the configured points, with an error plot.
    Invert(Common),
    /// Horosphere classes, cross-checked against the real-point oracle.
    Classify(Common),
    /// Runs a named verification suite.
    Verify {
        /// One of: homogeneity, pde, lemma1, reconstruction, cycles,
        /// inversion-hyperbolic, inversion-sphere, circle, classification, measure.
        suite: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn threads_from_env() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("HOROKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| Failure::Config(format!("HOROKIT_THREADS={raw:?} is not a count")))?;
    horokit::par::limit_threads(n).map_err(failure::config)?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<Vec<PathBuf>> {
    threads_from_env()?;
    let (command, cfg, seed, out) = match cli.command {
        Cmd::Transform(c) => (Command::Transform, ExperimentConfig::load(&c.config)?, c.seed, c.out),
        Cmd::Invert(c) => (Command::Invert, ExperimentConfig::load(&c.config)?, c.seed, c.out),
        Cmd::Classify(c) => (Command::Classify, ExperimentConfig::load(&c.config)?, c.seed, c.out),
        Cmd::Verify { suite, config, seed, out } => {
            let cfg = match config {
                Some(path) => ExperimentConfig::load(&path)?,
                None => ExperimentConfig::named(&format!("verify-{suite}")),
            };
            (Command::Verify { suite }, cfg, seed, out)
        }
    };
    let seed = seed.or(cfg.seed).unwrap_or(0);
    let dir = out.or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    execute(&command, &cfg, seed, &dir).with_context(|| format!("{} {}", command.name(), cfg.experiment_id))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("horokit: {e:#}");
            ExitCode::from(failure::exit_code(&e))
        }
    }
}
