//! `collapse-lab`: spectra, collapse sweeps and bound audits for circle
//! bundles with collapsing fibers.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::LevelFilter;

use crate::commands::Context;
use crate::config::{ExperimentConfig, Format};
use crate::error::CliError;
use crate::output::Writer;

const DEFAULT_OUT: &str = "collapse-lab-out";

#[derive(Parser, Debug)]
#[command(name = "collapse-lab", version, about = "Dirac spectra of collapsing circle bundles")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config (JSON)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides `outputs.dir`
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (default: logical cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Overrides the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq)]
enum Command {
    /// Eigenvalues per (mode, cutoff)
    Spectrum,
    /// Convergence of invariant modes and divergence of the rest along a sweep
    CollapseSweep,
    /// Collapse sweep plus side-by-side limit eigenvalues
    LimitCompare,
    /// Check every mode spectrum against the divergence bound
    BoundsAudit,
    /// Run the built-in oracle suite
    Validate,
}

fn init_logging() {
    let (level, unknown) = match std::env::var("COLLAPSE_LAB_LOG").as_deref() {
        Ok("quiet") => (LevelFilter::Off, None),
        Ok("debug") => (LevelFilter::Debug, None),
        Ok("info") | Err(_) => (LevelFilter::Info, None),
        Ok(other) => (LevelFilter::Info, Some(other.to_string())),
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
    if let Some(v) = unknown {
        log::warn!("COLLAPSE_LAB_LOG={v} not recognized (quiet, info, debug); using info");
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--jobs {n}: {e}")))?;
    }
    if cli.command == Command::Validate {
        let writer = cli.out.as_deref().map(|d| Writer::create(d, &[Format::Json])).transpose()?;
        return commands::validate(writer.as_ref());
    }
    let path = cli
        .config
        .ok_or_else(|| CliError::Config("--config PATH is required for this command".into()))?;
    let mut config = ExperimentConfig::load(&path)?;
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    config.validate()?;
    let dir = cli
        .out
        .or_else(|| config.outputs.dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let writer = Writer::create(&dir, &config.outputs.formats)?;
    let hash = config.hash();
    log::info!("config {} (hash {hash})", path.display());
    let ctx = Context { config, hash, writer };
    match cli.command {
        Command::Spectrum => commands::spectrum(&ctx),
        Command::CollapseSweep => commands::collapse_sweep(&ctx, false),
        Command::LimitCompare => commands::collapse_sweep(&ctx, true),
        Command::BoundsAudit => commands::bounds_audit(&ctx),
        Command::Validate => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("collapse-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
