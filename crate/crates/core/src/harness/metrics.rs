use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One row per completed episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    /// Environment steps taken when the episode ended.
    pub env_step: usize,
    pub episode: usize,
    pub episode_return: f64,
    /// Mean return of the last `rolling_window` episodes (fewer at the start).
    pub rolling_return: f64,
    pub circuit_executions: u64,
    pub clock_time_s: f64,
    pub anneal_jobs: u64,
    pub qubit_count: usize,
}

/// Fixed-window running mean.
#[derive(Debug, Clone)]
pub struct RollingMean {
    window: usize,
    values: VecDeque<f64>,
}

impl RollingMean {
    pub fn new(window: usize) -> Self {
        Self {
            window: window.max(1),
            values: VecDeque::with_capacity(window),
        }
    }

    pub fn push(&mut self, x: f64) -> f64 {
        if self.values.len() == self.window {
            self.values.pop_front();
        }
        self.values.push_back(x);
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn is_full(&self) -> bool {
        self.values.len() == self.window
    }
}

pub fn write_records_csv(path: &Path, records: &[MetricsRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Serde(format!("{}: {e}", path.display())))?;
    if records.is_empty() {
        w.write_record([
            "env_step",
            "episode",
            "episode_return",
            "rolling_return",
            "circuit_executions",
            "clock_time_s",
            "anneal_jobs",
            "qubit_count",
        ])
        .map_err(|e| Error::Serde(e.to_string()))?;
    }
    for r in records {
        w.serialize(r).map_err(|e| Error::Serde(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_records_csv(path: &Path) -> Result<Vec<MetricsRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Serde(format!("{}: {e}", path.display())))?;
    r.deserialize()
        .map(|row| row.map_err(|e| Error::Serde(format!("{}: {e}", path.display()))))
        .collect()
}

/// Per-seed outcome of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub episodes: usize,
    pub env_steps: usize,
    pub final_rolling_return: Option<f64>,
    pub reached_threshold: bool,
    /// First env step at which a full window averaged at least the threshold.
    pub steps_to_threshold: Option<usize>,
    pub executions_to_threshold: Option<u64>,
    /// Clock time when the threshold was reached, or the run total if never.
    pub clock_time_to_threshold_s: f64,
    pub total_circuit_executions: u64,
    pub total_clock_time_s: f64,
    pub total_anneal_jobs: u64,
    pub qubit_count: usize,
}

/// Mean and standard deviation across seeds on a common x grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub x_axis: String,
    pub x: Vec<f64>,
    pub mean: Vec<Option<f64>>,
    pub std: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub name: String,
    pub agent: String,
    pub env: String,
    pub encoding: String,
    pub ansatz_variant: String,
    pub replicas: usize,
    /// Set for runs produced by a sweep: `axis=value`.
    pub sweep_point: Option<String>,
    pub budget: usize,
    pub optimal_return: f64,
    pub threshold: f64,
    pub seeds: Vec<SeedSummary>,
    pub final_return_mean: Option<f64>,
    pub final_return_std: Option<f64>,
    pub seeds_reaching_threshold: usize,
    pub mean_steps_to_threshold: Option<f64>,
    pub mean_clock_time_to_threshold_s: f64,
    pub mean_total_circuit_executions: f64,
    pub mean_total_clock_time_s: f64,
    pub mean_total_anneal_jobs: f64,
    pub qubit_count: usize,
    pub curve: Curve,
}

/// Mean and sample standard deviation; `None` for no values.
pub fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (Some(mean), Some(var.sqrt()))
}

pub fn summarize_seed(
    seed: u64,
    records: &[MetricsRecord],
    env_steps: usize,
    totals: (u64, f64, u64),
    qubit_count: usize,
    threshold: f64,
    window: usize,
) -> SeedSummary {
    let hit = records
        .iter()
        .enumerate()
        .find(|(i, r)| i + 1 >= window && r.rolling_return >= threshold)
        .map(|(_, r)| r);
    SeedSummary {
        seed,
        episodes: records.len(),
        env_steps,
        final_rolling_return: records.last().map(|r| r.rolling_return),
        reached_threshold: hit.is_some(),
        steps_to_threshold: hit.map(|r| r.env_step),
        executions_to_threshold: hit.map(|r| r.circuit_executions),
        clock_time_to_threshold_s: hit.map_or(totals.1, |r| r.clock_time_s),
        total_circuit_executions: totals.0,
        total_clock_time_s: totals.1,
        total_anneal_jobs: totals.2,
        qubit_count,
    }
}

/// Rolling return of each seed sampled on `points` evenly spaced env steps.
pub fn env_step_curve(runs: &[&[MetricsRecord]], budget: usize, points: usize) -> Curve {
    let points = points.max(1);
    let x: Vec<f64> = (1..=points)
        .map(|i| (budget as f64 * i as f64 / points as f64).round())
        .collect();
    let mut mean = Vec::with_capacity(points);
    let mut std = Vec::with_capacity(points);
    for &xi in &x {
        let vals: Vec<f64> = runs
            .iter()
            .filter_map(|recs| {
                recs.iter()
                    .take_while(|r| r.env_step as f64 <= xi)
                    .last()
                    .map(|r| r.rolling_return)
            })
            .collect();
        let (m, s) = mean_std(&vals);
        mean.push(m);
        std.push(s);
    }
    Curve {
        x_axis: "env_steps".into(),
        x,
        mean,
        std,
    }
}
