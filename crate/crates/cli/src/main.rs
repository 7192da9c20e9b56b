//! `frontlab` command-line driver.
//!
//! Every subcommand reads a `key = value` configuration file, writes its
//! artifacts into `--out`, and prints a one-line JSON summary on stdout.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CliError, CliResult, Context};
use config::RunConfig;

#[derive(Parser)]
#[command(name = "frontlab", version, about = "Traveling-wave experiments for local and nonlocal front equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file with `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Size of the worker pool.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Also render SVG plots where available.
    #[arg(long, global = true)]
    svg: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Classify a shock triple and its traveling-wave reaction.
    Classify,
    /// Compute a Riesz-Feller heat kernel and its diagnostics.
    Kernel,
    /// Compute a traveling wave.
    Tw,
    /// Scan the cubic-flux end-state plane.
    RegionScan,
}

fn run(cli: &Cli) -> CliResult<serde_json::Value> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot size the worker pool: {e}")))?;
    }
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg = RunConfig::parse(&text)?;
    std::fs::create_dir_all(&cli.out)?;
    let ctx = Context { out: &cli.out, seed: cli.seed, svg: cli.svg };
    match cli.command {
        Command::Classify => commands::cmd_classify(&cfg, &ctx),
        Command::Kernel => commands::cmd_kernel(&cfg, &ctx),
        Command::Tw => commands::cmd_tw(&cfg, &ctx),
        Command::RegionScan => commands::cmd_region_scan(&cfg, &ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            print!("{}", output::to_json(&summary));
            ExitCode::SUCCESS
        }
        Err(e) => {
            print!("{}", e.report());
            eprintln!("frontlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
