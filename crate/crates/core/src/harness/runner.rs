use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::agents::{build_agent, StepContext};
use super::config::{AgentFamily, RunConfig};
use super::metrics::{
    env_step_curve, mean_std, summarize_seed, write_records_csv, ExperimentSummary, MetricsRecord,
    RollingMean,
};
use crate::envs::optimal_return;
use crate::error::{Error, Result};
use crate::qsim::{CostLedger, LedgerSnapshot};

/// Points on the summary's env-step grid.
pub const CURVE_POINTS: usize = 100;

/// Everything one seed produced.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub records: Vec<MetricsRecord>,
    pub env_steps: usize,
    pub totals: LedgerSnapshot,
    pub qubit_count: usize,
    pub wall_time_s: f64,
}

/// Runs one seed to its step budget. An episode cut off by the budget is
/// dropped: it yields no record and no end-of-episode update.
pub fn run_seed(config: &RunConfig, seed: u64) -> Result<SeedRun> {
    let started = Instant::now();
    let budget = config.budget()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut env = config.build_env()?;
    let mut agent = build_agent(&config.agent, config.timing, env.n_states(), env.n_actions(), &mut rng)?;
    let ledger = CostLedger::new();
    let qubit_count = agent.qubit_count();
    let mut rolling = RollingMean::new(config.rolling_window);
    let mut records = Vec::new();
    let mut env_step = 0;

    'run: while env_step < budget {
        let mut state = env.reset();
        let mut episode_return = 0.0;
        loop {
            if env_step >= budget {
                break 'run;
            }
            let mut ctx = StepContext {
                rng: &mut rng,
                ledger: &ledger,
                env_step,
                budget,
            };
            let action = agent.act(state, &mut ctx)?;
            let t = env.step(action)?;
            env_step += 1;
            episode_return += t.reward;
            ctx.env_step = env_step;
            agent.observe(&t, &mut ctx)?;
            if t.done {
                break;
            }
            state = t.next_state;
        }
        let mut ctx = StepContext {
            rng: &mut rng,
            ledger: &ledger,
            env_step,
            budget,
        };
        agent.end_episode(&mut ctx)?;
        let snap = ledger.snapshot();
        records.push(MetricsRecord {
            env_step,
            episode: records.len(),
            episode_return,
            rolling_return: rolling.push(episode_return),
            circuit_executions: snap.circuit_executions,
            clock_time_s: snap.clock_time_s(),
            anneal_jobs: snap.anneal_jobs,
            qubit_count,
        });
    }
    Ok(SeedRun {
        seed,
        records,
        env_steps: env_step,
        totals: ledger.snapshot(),
        qubit_count,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

/// Runs every seed (in parallel) and summarizes. Results are ordered as in
/// `config.seeds`.
pub fn run_seeds(config: &RunConfig) -> Result<(ExperimentSummary, Vec<SeedRun>)> {
    config.validate()?;
    let runs = config
        .seeds
        .par_iter()
        .map(|&seed| run_seed(config, seed))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(config, &runs)?;
    Ok((summary, runs))
}

pub fn summarize(config: &RunConfig, runs: &[SeedRun]) -> Result<ExperimentSummary> {
    let budget = config.budget()?;
    let env = config.build_env()?;
    let optimal = optimal_return(env.as_ref(), 1.0)?;
    let threshold = config.threshold_fraction * optimal;
    let seeds: Vec<_> = runs
        .iter()
        .map(|r| {
            summarize_seed(
                r.seed,
                &r.records,
                r.env_steps,
                (r.totals.circuit_executions, r.totals.clock_time_s(), r.totals.anneal_jobs),
                r.qubit_count,
                threshold,
                config.rolling_window,
            )
        })
        .collect();
    let finals: Vec<f64> = seeds.iter().filter_map(|s| s.final_rolling_return).collect();
    let (final_return_mean, final_return_std) = mean_std(&finals);
    let steps: Vec<f64> = seeds.iter().filter_map(|s| s.steps_to_threshold.map(|x| x as f64)).collect();
    let mean_of = |f: &dyn Fn(&super::metrics::SeedSummary) -> f64| {
        mean_std(&seeds.iter().map(f).collect::<Vec<_>>()).0.unwrap_or(0.0)
    };
    let record_slices: Vec<&[MetricsRecord]> = runs.iter().map(|r| r.records.as_slice()).collect();
    let agent = &config.agent;
    Ok(ExperimentSummary {
        name: config.name.clone(),
        agent: agent.family.to_string(),
        env: config.env.id.clone(),
        encoding: if agent.family == AgentFamily::Aa {
            "n/a".into()
        } else {
            agent.encoding.to_string()
        },
        ansatz_variant: if agent.family.uses_circuits() {
            agent.ansatz_variant.to_string()
        } else {
            "n/a".into()
        },
        replicas: if agent.family == AgentFamily::Fe { agent.fe.replicas } else { 0 },
        sweep_point: None,
        budget,
        optimal_return: optimal,
        threshold,
        seeds_reaching_threshold: seeds.iter().filter(|s| s.reached_threshold).count(),
        mean_steps_to_threshold: mean_std(&steps).0,
        mean_clock_time_to_threshold_s: mean_of(&|s| s.clock_time_to_threshold_s),
        mean_total_circuit_executions: mean_of(&|s| s.total_circuit_executions as f64),
        mean_total_clock_time_s: mean_of(&|s| s.total_clock_time_s),
        mean_total_anneal_jobs: mean_of(&|s| s.total_anneal_jobs as f64),
        qubit_count: runs.first().map_or(0, |r| r.qubit_count),
        curve: env_step_curve(&record_slices, budget, CURVE_POINTS),
        final_return_mean,
        final_return_std,
        seeds,
    })
}

pub fn seed_csv_name(seed: u64) -> String {
    format!("seed_{seed}.csv")
}

pub const SUMMARY_FILE: &str = "summary.json";
pub const WALL_TIME_FILE: &str = "wall_time.json";
pub const CONFIG_FILE: &str = "config.toml";

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Serde(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_summary(dir: &Path, summary: &ExperimentSummary) -> Result<()> {
    write_json(&dir.join(SUMMARY_FILE), summary)
}

pub fn read_summary(dir: &Path) -> Result<ExperimentSummary> {
    let path = dir.join(SUMMARY_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Serde(format!("{}: {e}", path.display())))
}

/// Runs the experiment and writes `seed_<n>.csv` per seed, `summary.json`,
/// the resolved `config.toml`, and `wall_time.json` into `out_dir`.
///
/// Everything except `wall_time.json` is a pure function of the config.
pub fn run_experiment(config: &RunConfig, out_dir: &Path) -> Result<ExperimentSummary> {
    let (summary, runs) = run_seeds(config)?;
    write_outputs(config, out_dir, &summary, &runs)?;
    Ok(summary)
}

pub fn write_outputs(config: &RunConfig, out_dir: &Path, summary: &ExperimentSummary, runs: &[SeedRun]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    for run in runs {
        let path = out_dir.join(seed_csv_name(run.seed));
        write_records_csv(&path, &run.records)?;
        written.push(path);
    }
    write_summary(out_dir, summary)?;
    let config_path = out_dir.join(CONFIG_FILE);
    std::fs::write(&config_path, config.to_toml_string()?).map_err(|e| Error::io(&config_path, e))?;
    let wall: BTreeMap<String, f64> = runs
        .iter()
        .map(|r| (format!("seed_{}", r.seed), r.wall_time_s))
        .collect();
    write_json(&out_dir.join(WALL_TIME_FILE), &wall)?;
    Ok(written)
}
