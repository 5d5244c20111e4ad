//! `qrlbench`: run, sweep, validate and report benchmark experiments.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 1 for anything else.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qrl_bench::harness::{report_dir, run_experiment, run_sweep, RunConfig, SweepAxis};
use qrl_bench::Result;

#[derive(Parser)]
#[command(name = "qrlbench", version, about = "Quantum reinforcement learning benchmark runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every seed of an experiment and write per-seed CSVs plus a summary.
    Run {
        config: PathBuf,
        /// Output directory (default: $QRLBENCH_OUTPUT_ROOT/<name>, or the config's output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated seeds overriding the config.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Environment-step budget overriding the config.
        #[arg(long)]
        max_env_steps: Option<usize>,
    },
    /// Run one experiment per value of an ablation axis and tabulate them.
    Sweep {
        config: PathBuf,
        /// ansatz_variant, replica_count or encoding.
        #[arg(long)]
        axis: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        max_env_steps: Option<usize>,
    },
    /// Collect every summary under a directory into report.csv and report.md.
    Report { dir: PathBuf },
    /// Parse and check a config without running it.
    Validate { config: PathBuf },
}

fn load(path: &PathBuf, seeds: Option<Vec<u64>>, max_env_steps: Option<usize>) -> Result<RunConfig> {
    let mut config = RunConfig::from_path(path)?;
    if let Some(seeds) = seeds {
        config.seeds = seeds;
    }
    if max_env_steps.is_some() {
        config.max_env_steps = max_env_steps;
    }
    config.validate()?;
    Ok(config)
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run {
            config,
            out,
            seeds,
            max_env_steps,
        } => {
            let config = load(&config, seeds, max_env_steps)?;
            let out = out.unwrap_or_else(|| config.resolve_output_dir());
            let summary = run_experiment(&config, &out)?;
            println!(
                "{}: {}/{} seeds reached {:.3}; final return {}; wrote {}",
                summary.name,
                summary.seeds_reaching_threshold,
                summary.seeds.len(),
                summary.threshold,
                summary
                    .final_return_mean
                    .map_or("n/a".to_string(), |m| format!("{m:.3}")),
                out.display()
            );
        }
        Command::Sweep {
            config,
            axis,
            out,
            seeds,
            max_env_steps,
        } => {
            let axis: SweepAxis = axis.parse()?;
            let config = load(&config, seeds, max_env_steps)?;
            let out = out.unwrap_or_else(|| config.resolve_output_dir());
            let result = run_sweep(&config, axis, &out)?;
            print!("{}", result.to_markdown());
            println!("wrote {}", out.display());
        }
        Command::Report { dir } => {
            let report = report_dir(&dir)?;
            print!("{}", report.markdown);
        }
        Command::Validate { config } => {
            let c = load(&config, None, None)?;
            println!(
                "ok: {} ({} on {}, {} seeds, {} env steps)",
                c.name,
                c.agent.family,
                c.env.id,
                c.seeds.len(),
                c.budget()?
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
