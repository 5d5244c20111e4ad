use std::path::{Path, PathBuf};

use super::metrics::{read_records_csv, ExperimentSummary, MetricsRecord};
use super::runner::{read_summary, seed_csv_name, SUMMARY_FILE};
use super::sweep::fmt_return;
use crate::error::{Error, Result};

pub const REPORT_CSV: &str = "report.csv";
pub const REPORT_MD: &str = "report.md";
pub const X_AXES: [&str; 3] = ["env_steps", "circuit_executions", "clock_time_s"];

/// A summary with the per-seed records it was built from.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub summary: ExperimentSummary,
    pub seeds: Vec<(u64, Vec<MetricsRecord>)>,
}

impl Experiment {
    pub fn load(dir: &Path) -> Result<Self> {
        let summary = read_summary(dir)?;
        let seeds = summary
            .seeds
            .iter()
            .map(|s| Ok((s.seed, read_records_csv(&dir.join(seed_csv_name(s.seed)))?)))
            .collect::<Result<_>>()?;
        Ok(Self { summary, seeds })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// Columns `experiment,seed,x_axis,x,y` with `y` the rolling return.
    pub long_csv: String,
    /// Comparison table, best final return first.
    pub markdown: String,
}

pub fn build_report(experiments: &[Experiment]) -> Result<Report> {
    if experiments.is_empty() {
        return Err(Error::Argument("report needs at least one experiment".into()));
    }
    let mut csv = String::from("experiment,seed,x_axis,x,y\n");
    for e in experiments {
        for (seed, records) in &e.seeds {
            for axis in X_AXES {
                for r in records {
                    let x = match axis {
                        "env_steps" => r.env_step.to_string(),
                        "circuit_executions" => r.circuit_executions.to_string(),
                        _ => r.clock_time_s.to_string(),
                    };
                    csv.push_str(&format!("{},{},{},{},{}\n", e.summary.name, seed, axis, x, r.rolling_return));
                }
            }
        }
    }

    let mut order: Vec<&ExperimentSummary> = experiments.iter().map(|e| &e.summary).collect();
    order.sort_by(|a, b| {
        let key = |m: &ExperimentSummary| m.final_return_mean.unwrap_or(f64::NEG_INFINITY);
        key(b).total_cmp(&key(a)).then_with(|| a.name.cmp(&b.name))
    });
    let mut md = String::from(
        "| experiment | agent | env | qubits | final return | seeds >= threshold | steps to threshold | executions | clock time (s) | clock time to threshold (s) |\n",
    );
    md.push_str("|---|---|---|---|---|---|---|---|---|---|\n");
    for m in order {
        md.push_str(&format!(
            "| {} | {} | {} | {} | {} | {}/{} | {} | {:.0} | {:.3} | {:.3} |\n",
            m.name,
            m.agent,
            m.env,
            m.qubit_count,
            fmt_return(m),
            m.seeds_reaching_threshold,
            m.seeds.len(),
            m.mean_steps_to_threshold.map_or("-".to_string(), |s| format!("{s:.0}")),
            m.mean_total_circuit_executions,
            m.mean_total_clock_time_s,
            m.mean_clock_time_to_threshold_s,
        ));
    }
    Ok(Report {
        long_csv: csv,
        markdown: md,
    })
}

/// Directories under `root` (inclusive) holding a summary, in path order.
pub fn find_experiments(root: &Path) -> Result<Vec<PathBuf>> {
    let mut found = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        if dir.join(SUMMARY_FILE).is_file() {
            found.push(dir.clone());
        }
        let entries = std::fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))?;
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(&dir, e))?;
            if entry.file_type().map_err(|e| Error::io(entry.path(), e))?.is_dir() {
                stack.push(entry.path());
            }
        }
    }
    found.sort();
    Ok(found)
}

/// Builds the report for every experiment under `root` and writes
/// `report.csv` and `report.md` there.
pub fn report_dir(root: &Path) -> Result<Report> {
    let experiments = find_experiments(root)?
        .iter()
        .map(|d| Experiment::load(d))
        .collect::<Result<Vec<_>>>()?;
    if experiments.is_empty() {
        return Err(Error::Argument(format!("no {SUMMARY_FILE} found under {}", root.display())));
    }
    let report = build_report(&experiments)?;
    let csv_path = root.join(REPORT_CSV);
    std::fs::write(&csv_path, &report.long_csv).map_err(|e| Error::io(&csv_path, e))?;
    let md_path = root.join(REPORT_MD);
    std::fs::write(&md_path, &report.markdown).map_err(|e| Error::io(&md_path, e))?;
    Ok(report)
}
