use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use super::config::{AgentFamily, RunConfig};
use super::metrics::ExperimentSummary;
use super::runner::{run_seeds, write_outputs};
use crate::ansatz::{build_circuit, encode_state, AnsatzSpec, Encoding, Variant};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    AnsatzVariant,
    ReplicaCount,
    Encoding,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 3] = [SweepAxis::AnsatzVariant, SweepAxis::ReplicaCount, SweepAxis::Encoding];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::AnsatzVariant => "ansatz_variant",
            SweepAxis::ReplicaCount => "replica_count",
            SweepAxis::Encoding => "encoding",
        }
    }

    pub fn supports(self, family: AgentFamily) -> bool {
        match self {
            SweepAxis::AnsatzVariant => family.uses_circuits(),
            SweepAxis::ReplicaCount => family == AgentFamily::Fe,
            SweepAxis::Encoding => family != AgentFamily::Aa,
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "ansatz_variant" | "ansatz" | "variant" => Ok(SweepAxis::AnsatzVariant),
            "replica_count" | "replicas" => Ok(SweepAxis::ReplicaCount),
            "encoding" => Ok(SweepAxis::Encoding),
            _ => Err(Error::Config(format!(
                "unknown sweep axis '{s}' (expected ansatz_variant, replica_count or encoding)"
            ))),
        }
    }
}

pub const REPLICA_COUNTS: [usize; 3] = [1, 5, 10];

/// One configuration per axis value, named `<base>_<axis>_<value>`.
pub fn sweep_points(base: &RunConfig, axis: SweepAxis) -> Result<Vec<(String, RunConfig)>> {
    if !axis.supports(base.agent.family) {
        return Err(Error::Config(format!(
            "axis {axis} does not apply to agent family {}",
            base.agent.family
        )));
    }
    let mut out = Vec::new();
    let mut push = |value: String, edit: &dyn Fn(&mut RunConfig)| {
        let mut c = base.clone();
        edit(&mut c);
        c.name = format!("{}_{}_{}", base.name, axis, value);
        c.output_dir = None;
        out.push((value, c));
    };
    match axis {
        SweepAxis::AnsatzVariant => {
            for v in Variant::ALL {
                push(v.to_string(), &|c| c.agent.ansatz_variant = v);
            }
        }
        SweepAxis::ReplicaCount => {
            for r in REPLICA_COUNTS {
                push(r.to_string(), &|c| c.agent.fe.replicas = r);
            }
        }
        SweepAxis::Encoding => {
            for e in [Encoding::Binary, Encoding::OneHot] {
                push(e.to_string(), &|c| c.agent.encoding = e);
            }
        }
    }
    Ok(out)
}

/// Two-qubit gates in one circuit of a circuit-based configuration.
pub fn two_qubit_gates_per_circuit(config: &RunConfig) -> Result<Option<usize>> {
    if !config.agent.family.uses_circuits() {
        return Ok(None);
    }
    let env = config.build_env()?;
    let a = &config.agent;
    let spec = AnsatzSpec::for_problem(a.encoding, a.ansatz_variant, a.n_layers, env.n_states(), env.n_actions())?;
    let features = encode_state(a.encoding, 0, env.n_states())?;
    Ok(Some(build_circuit(&spec, &features)?.two_qubit_gate_count()))
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: String,
    pub summary: ExperimentSummary,
    pub two_qubit_gates: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
}

pub const SWEEP_CSV_HEADER: &str = "axis,value,experiment,agent,env,qubit_count,two_qubit_gates,seeds,final_return_mean,final_return_std,seeds_reaching_threshold,mean_steps_to_threshold,mean_total_circuit_executions,mean_total_clock_time_s,mean_total_anneal_jobs";

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(SWEEP_CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let m = &r.summary;
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                self.axis,
                r.value,
                m.name,
                m.agent,
                m.env,
                m.qubit_count,
                opt(r.two_qubit_gates),
                m.seeds.len(),
                opt(m.final_return_mean),
                opt(m.final_return_std),
                m.seeds_reaching_threshold,
                opt(m.mean_steps_to_threshold),
                m.mean_total_circuit_executions,
                m.mean_total_clock_time_s,
                m.mean_total_anneal_jobs,
            ));
        }
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut s = format!(
            "| {} | qubits | 2q gates | final return | seeds >= threshold | executions | clock time (s) | anneal jobs |\n",
            self.axis
        );
        s.push_str("|---|---|---|---|---|---|---|---|\n");
        for r in &self.rows {
            let m = &r.summary;
            s.push_str(&format!(
                "| {} | {} | {} | {} | {}/{} | {:.0} | {:.3} | {:.0} |\n",
                r.value,
                m.qubit_count,
                r.two_qubit_gates.map_or("-".to_string(), |g| g.to_string()),
                fmt_return(m),
                m.seeds_reaching_threshold,
                m.seeds.len(),
                m.mean_total_circuit_executions,
                m.mean_total_clock_time_s,
                m.mean_total_anneal_jobs,
            ));
        }
        s
    }
}

pub(crate) fn fmt_return(m: &ExperimentSummary) -> String {
    match (m.final_return_mean, m.final_return_std) {
        (Some(mean), Some(std)) => format!("{mean:.3} ± {std:.3}"),
        _ => "-".into(),
    }
}

/// Runs every sweep point into `<out_root>/<point name>/` and writes
/// `sweep_<axis>.csv` and `sweep_<axis>.md` into `out_root`. All points are
/// validated before the first run starts. Points run in parallel; rows keep
/// the axis order.
pub fn run_sweep(base: &RunConfig, axis: SweepAxis, out_root: &Path) -> Result<SweepResult> {
    let points = sweep_points(base, axis)?;
    for (_, c) in &points {
        c.validate()?;
    }
    let rows = points
        .into_par_iter()
        .map(|(value, config)| {
            let (mut summary, runs) = run_seeds(&config)?;
            summary.sweep_point = Some(format!("{axis}={value}"));
            write_outputs(&config, &out_root.join(&config.name), &summary, &runs)?;
            Ok(SweepRow {
                two_qubit_gates: two_qubit_gates_per_circuit(&config)?,
                value,
                summary,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let result = SweepResult { axis, rows };
    let csv_path = out_root.join(format!("sweep_{axis}.csv"));
    std::fs::write(&csv_path, result.to_csv()).map_err(|e| Error::io(&csv_path, e))?;
    let md_path = out_root.join(format!("sweep_{axis}.md"));
    std::fs::write(&md_path, result.to_markdown()).map_err(|e| Error::io(&md_path, e))?;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(family: &str) -> RunConfig {
        RunConfig::from_toml_str(&format!(
            "name = \"b\"\nseeds = [0]\nmax_env_steps = 40\n[env]\nid = \"gridworld_3x3\"\n[agent]\nfamily = \"{family}\"\nn_layers = 1\n[agent.fe]\nhidden_layers = [2]\n[agent.fe.schedule]\nreads = 20\nsweeps = 5\n"
        ))
        .unwrap()
    }

    #[test]
    fn axis_compatibility() {
        assert!(sweep_points(&base("aa"), SweepAxis::Encoding).is_err());
        assert!(sweep_points(&base("qpg"), SweepAxis::ReplicaCount).is_err());
        assert!(sweep_points(&base("fe"), SweepAxis::AnsatzVariant).is_err());
        assert!(sweep_points(&base("fe"), SweepAxis::ReplicaCount).unwrap().len() == 3);
        assert!("bogus".parse::<SweepAxis>().unwrap_err().is_config());
    }

    #[test]
    fn variant_points_and_gate_counts() {
        let pts = sweep_points(&base("qdqn"), SweepAxis::AnsatzVariant).unwrap();
        let names: Vec<_> = pts.iter().map(|(_, c)| c.name.clone()).collect();
        assert_eq!(names, ["b_ansatz_variant_full", "b_ansatz_variant_a", "b_ansatz_variant_b"]);
        let gates: Vec<_> = pts.iter().map(|(_, c)| two_qubit_gates_per_circuit(c).unwrap()).collect();
        // 4 qubits, one layer: a ring of 4 CZ for the full ansatz only
        assert_eq!(gates, [Some(4), Some(0), Some(0)]);
    }

    #[test]
    fn encoding_sweep_qubits() {
        let pts = sweep_points(&base("qpg"), SweepAxis::Encoding).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let mut b = base("qpg");
        b.max_env_steps = Some(20);
        let res = run_sweep(&b, SweepAxis::Encoding, dir.path()).unwrap();
        assert_eq!(pts.len(), 2);
        let q: Vec<_> = res.rows.iter().map(|r| r.summary.qubit_count).collect();
        assert_eq!(q, [4, 9]);
        let csv = std::fs::read_to_string(dir.path().join("sweep_encoding.csv")).unwrap();
        assert_eq!(csv.lines().count(), 3);
        assert!(dir.path().join("b_encoding_one_hot/summary.json").exists());
    }

    #[test]
    fn replica_sweep_runs() {
        let dir = tempfile::tempdir().unwrap();
        let res = run_sweep(&base("fe"), SweepAxis::ReplicaCount, dir.path()).unwrap();
        let q: Vec<_> = res.rows.iter().map(|r| r.summary.qubit_count).collect();
        assert_eq!(q, [2, 10, 20]);
        for r in &res.rows {
            assert!(r.summary.mean_total_anneal_jobs > 0.0);
            assert_eq!(r.summary.mean_total_circuit_executions, 0.0);
        }
        let md = std::fs::read_to_string(dir.path().join("sweep_replica_count.md")).unwrap();
        assert_eq!(md.lines().count(), 5);
    }
}
