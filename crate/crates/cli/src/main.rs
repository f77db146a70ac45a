//! `tmspin`: spin-Hamiltonian simulations of d¹ transition-metal defects.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "tmspin", version, about)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads for sweeps and scans.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    dump_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Energy levels versus static field.
    Sweep,
    /// Transition frequencies and Rabi frequencies along a field sweep.
    Transitions,
    /// Drive matrix elements over the lowest four doublets, with and without hyperfine.
    Matrixmap,
    /// (eta, lambda) consistency scan against target splittings.
    Fit,
    /// Effective-spin parameters and comparison with the full model.
    Effective,
    /// Angular wavefunction grid.
    Wavefunction,
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring thread pool")?;
    }
    let path = cli.config.context("--config is required")?;
    let cfg = RunConfig::load(&path)?;
    if cli.dump_config {
        print!("{}", cfg.to_json());
        return Ok(());
    }
    let command = cli.command.context("no subcommand given")?;
    std::fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    match command {
        Command::Sweep => commands::sweep(&cfg, &cli.out),
        Command::Transitions => commands::transitions(&cfg, &cli.out),
        Command::Matrixmap => commands::matrixmap(&cfg, &cli.out),
        Command::Fit => commands::fit(&cfg, &cli.out),
        Command::Effective => commands::effective(&cfg, &cli.out),
        Command::Wavefunction => commands::wavefunction(&cfg, &cli.out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::new().filter_level(log::LevelFilter::Warn).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
