use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::aa_agent::AaConfig;
use crate::ansatz::{Encoding, Variant};
use crate::envs::{builtin_layout, ChainEnv, Environment, GridworldEnv, GridworldSpec};
use crate::error::{Error, Result};
use crate::fe_agents::FeConfig;
use crate::pqc_agents::{QdqnConfig, QpgConfig};
use crate::qsim::TimingModel;

/// Environment variable naming the directory that run outputs go under.
pub const OUTPUT_ROOT_ENV: &str = "QRLBENCH_OUTPUT_ROOT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentFamily {
    Qpg,
    Qdqn,
    Fe,
    Aa,
}

impl AgentFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            AgentFamily::Qpg => "qpg",
            AgentFamily::Qdqn => "qdqn",
            AgentFamily::Fe => "fe",
            AgentFamily::Aa => "aa",
        }
    }

    pub fn uses_circuits(self) -> bool {
        matches!(self, AgentFamily::Qpg | AgentFamily::Qdqn)
    }
}

impl fmt::Display for AgentFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgentFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qpg" => Ok(AgentFamily::Qpg),
            "qdqn" => Ok(AgentFamily::Qdqn),
            "fe" => Ok(AgentFamily::Fe),
            "aa" => Ok(AgentFamily::Aa),
            _ => Err(Error::Config(format!("unknown agent family '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvConfig {
    /// Built-in layout name, `chain_<n>`, or a label when `layout_file` is set.
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout_file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    pub family: AgentFamily,
    #[serde(default = "default_encoding")]
    pub encoding: Encoding,
    #[serde(default = "default_variant")]
    pub ansatz_variant: Variant,
    #[serde(default = "default_layers")]
    pub n_layers: usize,
    #[serde(default)]
    pub qpg: QpgConfig,
    #[serde(default)]
    pub qdqn: QdqnConfig,
    #[serde(default)]
    pub fe: FeConfig,
    #[serde(default)]
    pub aa: AaConfig,
}

fn default_encoding() -> Encoding {
    Encoding::Binary
}

fn default_variant() -> Variant {
    Variant::Full
}

fn default_layers() -> usize {
    5
}

fn default_seeds() -> Vec<u64> {
    (0..10).collect()
}

fn default_threshold() -> f64 {
    0.9
}

fn default_window() -> usize {
    20
}

/// One experiment: an agent on an environment over a list of seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    pub env: EnvConfig,
    pub agent: AgentConfig,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Environment-step budget per seed; defaults by environment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_env_steps: Option<usize>,
    #[serde(default)]
    pub timing: TimingModel,
    /// Fraction of the optimal return that counts as solved.
    #[serde(default = "default_threshold")]
    pub threshold_fraction: f64,
    /// Episodes in the rolling-return window.
    #[serde(default = "default_window")]
    pub rolling_window: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

/// Default budget for the built-in environments.
pub fn default_budget(env_id: &str) -> Option<usize> {
    match env_id {
        "gridworld_3x3" => Some(20_000),
        "gridworld_3x5" => Some(30_000),
        "frozen_lake_4x4" => Some(50_000),
        "frozen_lake_8x8" => Some(150_000),
        id if id.starts_with("chain_") => Some(2_000),
        _ => None,
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file; a relative `layout_file` resolves against the
    /// config's directory.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::from_toml_str(&text)?;
        if let Some(layout) = &config.env.layout_file {
            if layout.is_relative() {
                let base = path.parent().unwrap_or_else(|| Path::new("."));
                config.env.layout_file = Some(base.join(layout));
            }
        }
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn budget(&self) -> Result<usize> {
        self.max_env_steps
            .or_else(|| default_budget(&self.env.id))
            .ok_or_else(|| Error::Config(format!("no default budget for '{}'; set max_env_steps", self.env.id)))
    }

    pub fn build_env(&self) -> Result<Box<dyn Environment>> {
        if let Some(path) = &self.env.layout_file {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            return Ok(Box::new(GridworldEnv::new(GridworldSpec::parse(&text)?)));
        }
        if let Some(n) = self.env.id.strip_prefix("chain_") {
            let n: usize = n
                .parse()
                .map_err(|_| Error::Config(format!("bad chain length in '{}'", self.env.id)))?;
            return Ok(Box::new(ChainEnv::new(n, 1.0)?));
        }
        Ok(Box::new(GridworldEnv::new(builtin_layout(&self.env.id)?)))
    }

    /// Checks everything that can be checked without running, including
    /// building the environment.
    /// Checks the whole configuration; every failure is reported as
    /// [`Error::Config`].
    pub fn validate(&self) -> Result<()> {
        self.check().map_err(|e| if e.is_config() { e } else { Error::Config(e.to_string()) })
    }

    fn check(&self) -> Result<()> {
        if self.name.trim().is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::Config("name must be non-empty and contain no path separators".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return Err(Error::Config("seeds must be distinct".into()));
        }
        if self.budget()? == 0 {
            return Err(Error::Config("max_env_steps must be positive".into()));
        }
        if !(self.threshold_fraction > 0.0 && self.threshold_fraction <= 1.0) {
            return Err(Error::Config("threshold_fraction must lie in (0, 1]".into()));
        }
        if self.rolling_window == 0 {
            return Err(Error::Config("rolling_window must be at least 1".into()));
        }
        self.timing.validate()?;
        let env = self.build_env()?;
        let (n_states, n_actions) = (env.n_states(), env.n_actions());
        let agent = &self.agent;
        match agent.family {
            AgentFamily::Qpg | AgentFamily::Qdqn => {
                if agent.family == AgentFamily::Qpg {
                    agent.qpg.validate()?;
                } else {
                    agent.qdqn.validate()?;
                }
                crate::ansatz::AnsatzSpec::for_problem(
                    agent.encoding,
                    agent.ansatz_variant,
                    agent.n_layers,
                    n_states,
                    n_actions,
                )?;
            }
            AgentFamily::Fe => {
                agent.fe.validate()?;
                if agent.encoding == Encoding::Binary && n_states < 2 {
                    return Err(Error::Config("binary encoding needs at least 2 states".into()));
                }
            }
            AgentFamily::Aa => agent.aa.validate()?,
        }
        Ok(())
    }

    /// `output_dir` if set, otherwise `<root>/<name>` with the root taken
    /// from `QRLBENCH_OUTPUT_ROOT` (default `results`).
    pub fn resolve_output_dir(&self) -> PathBuf {
        if let Some(dir) = &self.output_dir {
            return dir.clone();
        }
        output_root().join(&self.name)
    }
}

pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("results"))
}
