//! Seeded experiment runner, ablation sweeps and reporting.
//!
//! A [`RunConfig`] (TOML) names an environment, an agent and a list of seeds.
//! Seeds run in parallel and each writes one CSV row per completed episode;
//! `summary.json` aggregates them. Everything except `wall_time.json` is a
//! pure function of the config, so reruns are byte-identical.

mod agents;
mod config;
mod metrics;
mod report;
mod runner;
mod sweep;

pub use agents::{build_agent, Agent, StepContext};
pub use config::{default_budget, output_root, AgentConfig, AgentFamily, EnvConfig, RunConfig, OUTPUT_ROOT_ENV};
pub use metrics::{
    env_step_curve, mean_std, read_records_csv, summarize_seed, write_records_csv, Curve, ExperimentSummary,
    MetricsRecord, RollingMean, SeedSummary,
};
pub use report::{build_report, find_experiments, report_dir, Experiment, Report, REPORT_CSV, REPORT_MD, X_AXES};
pub use runner::{
    read_summary, run_experiment, run_seed, run_seeds, seed_csv_name, summarize, write_outputs, write_summary,
    SeedRun, CONFIG_FILE, CURVE_POINTS, SUMMARY_FILE, WALL_TIME_FILE,
};
pub use sweep::{
    run_sweep, sweep_points, two_qubit_gates_per_circuit, SweepAxis, SweepResult, SweepRow, REPLICA_COUNTS,
    SWEEP_CSV_HEADER,
};
