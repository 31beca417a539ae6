//! Experiment runner for the consensus QoC toolkit.
//!
//! Subcommands build tradeoff curves, QoC tables and slot allocations from a
//! single TOML config. All artifacts are deterministic: rerunning a command
//! with the same config produces byte-identical files at any thread count.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::ExperimentConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Run(String),
    #[error("{0}")]
    Infeasible(String),
}

impl CliError {
    /// Exit-code contract: 0 success, 2 config error, 3 simulation/runtime
    /// error, 4 infeasible optimization.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(_) => 3,
            CliError::Infeasible(_) => 4,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "qoc",
    version,
    about = "Consensus QoC curves, tables and TDD slot allocation"
)]
struct Cli {
    /// Path to a TOML experiment config (overrides --profile).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in config profile.
    #[arg(long, global = true, default_value = "desk", value_parser = ["desk", "paper"])]
    profile: String,
    /// Override the experiment seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the Monte-Carlo batch size.
    #[arg(long, global = true)]
    runs: Option<u32>,
    /// Output directory (overrides the config's output_dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the three AUC tradeoff curves and write one CSV per curve.
    Tradeoff,
    /// Build the QoC table, solve every configured scheme and write the
    /// comparison report (JSON + CSV).
    CompareSchemes,
    /// Rebuild the table and solve all schemes for each TDD pattern.
    TddSweep {
        /// Comma-separated patterns (defaults to the config's list).
        #[arg(long, value_delimiter = ',')]
        patterns: Option<Vec<String>>,
    },
    /// Compute the per-robot PRB requirements from the link budgets.
    Prb,
    /// Solve a single allocation and serialize the full solution.
    Allocate {
        #[arg(long)]
        scheme: qoc_core::allocator::Scheme,
        /// Reuse a previously built table file instead of rebuilding.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Build the QoC table and write its text serialization.
    BuildTable,
}

fn init_thread_pool() {
    #[cfg(feature = "parallel")]
    if let Ok(value) = std::env::var("QOC_THREADS") {
        match value.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("warning: could not set thread count: {e}");
                }
            }
            _ => eprintln!("warning: ignoring invalid QOC_THREADS value \"{value}\""),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut experiment = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => match cli.profile.as_str() {
            "paper" => ExperimentConfig::parse(config::PAPER_PROFILE)?,
            _ => ExperimentConfig::parse(config::DESK_PROFILE)?,
        },
    };
    if let Some(seed) = cli.seed {
        experiment.sim.seed = seed;
    }
    if let Some(runs) = cli.runs {
        if runs == 0 {
            return Err(CliError::Config("--runs must be at least 1".into()));
        }
        experiment.experiment.n_runs = runs;
    }
    let out_dir = cli.out.clone().unwrap_or_else(|| experiment.experiment.output_dir.clone());

    // validate the full config up front so bad inputs exit with code 2
    experiment.sim_config()?;
    experiment.delay_model()?;
    experiment.frame()?;
    experiment.link_budget(&experiment.link.uplink)?;
    experiment.link_budget(&experiment.link.downlink)?;
    experiment.schemes()?;
    experiment.table_mode()?;

    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Run(format!("cannot create {}: {e}", out_dir.display())))?;
    let ctx = commands::Context { config: experiment, profile: cli.profile.clone(), out_dir };
    match &cli.command {
        Command::Tradeoff => commands::cmd_tradeoff(&ctx),
        Command::CompareSchemes => commands::cmd_compare_schemes(&ctx),
        Command::TddSweep { patterns } => {
            let patterns = patterns.clone().unwrap_or_else(|| ctx.config.tdd_patterns());
            commands::cmd_tdd_sweep(&ctx, &patterns)
        }
        Command::Prb => commands::cmd_prb(&ctx),
        Command::Allocate { scheme, table } => {
            commands::cmd_allocate(&ctx, *scheme, table.as_deref())
        }
        Command::BuildTable => commands::cmd_build_table(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_thread_pool();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
