//! Command-line front end. Exit codes: 0 success, 2 configuration problem
//! (parse failure, unknown key, constraint violation), 3 runtime failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use zenoloop::config::RunConfig;
use zenoloop::error::Error;
use zenoloop::{cmd_exact, cmd_ifm, cmd_montecarlo, cmd_sweep};

#[derive(Parser)]
#[command(
    name = "zenoloop",
    about = "Simulator for looped quantum-Zeno protective measurement of photon polarization",
    version
)]
struct Cli {
    /// Path to the TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides the config's out_dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// RNG seed (overrides the config's seed).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Suppress the effective-configuration echo on stdout.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact lattice evolution: survival, moments, final position density.
    Exact,
    /// Monte Carlo photon ensemble through the optical loop.
    Montecarlo,
    /// Grid sweep over (N, xi, theta) with estimator and baseline columns.
    Sweep,
    /// Interaction-free detection probabilities across cycle counts.
    Ifm,
}

fn run(cli: Cli) -> Result<(), Error> {
    let config_path = cli
        .config
        .ok_or_else(|| Error::Config("--config <path> is required".to_string()))?;
    let mut cfg = RunConfig::from_path(&config_path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.out_dir = out;
    }
    match cli.command {
        Command::Exact => cmd_exact(&cfg, cli.quiet),
        Command::Montecarlo => cmd_montecarlo(&cfg, cli.quiet),
        Command::Sweep => cmd_sweep(&cfg, cli.quiet),
        Command::Ifm => cmd_ifm(&cfg, cli.quiet),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidParameter { .. } => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}
