use rand_chacha::ChaCha8Rng;

use super::config::{AgentConfig, AgentFamily};
use crate::aa_agent::AaAgent;
use crate::ansatz::{AnsatzSpec, ParamSet};
use crate::envs::Transition;
use crate::error::Result;
use crate::fe_agents::FeAgent;
use crate::pqc_agents::{PqcModel, QdqnAgent, QpgAgent};
use crate::qsim::{CostLedger, TimingModel};
use crate::schedule::EpsilonSchedule;

/// Per-step resources handed to an agent by the runner.
pub struct StepContext<'a> {
    pub rng: &'a mut ChaCha8Rng,
    pub ledger: &'a CostLedger,
    /// Environment steps taken so far in this run.
    pub env_step: usize,
    pub budget: usize,
}

impl StepContext<'_> {
    fn epsilon(&self, schedule: &EpsilonSchedule) -> f64 {
        schedule.value(self.env_step, self.budget)
    }
}

/// Uniform driver interface over the agent families.
pub trait Agent: Send {
    fn act(&mut self, state: usize, ctx: &mut StepContext) -> Result<usize>;
    fn observe(&mut self, transition: &Transition, ctx: &mut StepContext) -> Result<()>;
    /// Called after every completed episode.
    fn end_episode(&mut self, ctx: &mut StepContext) -> Result<()>;
    /// Qubits (or annealer spins) one evaluation needs.
    fn qubit_count(&self) -> usize;
}

struct Qpg {
    agent: QpgAgent,
    episode: Vec<Transition>,
}

impl Agent for Qpg {
    fn act(&mut self, state: usize, ctx: &mut StepContext) -> Result<usize> {
        self.agent.sample_action(state, ctx.rng, ctx.ledger)
    }

    fn observe(&mut self, transition: &Transition, _ctx: &mut StepContext) -> Result<()> {
        self.episode.push(*transition);
        Ok(())
    }

    fn end_episode(&mut self, ctx: &mut StepContext) -> Result<()> {
        if !self.episode.is_empty() {
            self.agent.update(&self.episode, ctx.ledger)?;
            self.episode.clear();
        }
        Ok(())
    }

    fn qubit_count(&self) -> usize {
        self.agent.model().spec().n_qubits
    }
}

struct Qdqn {
    agent: QdqnAgent,
}

impl Agent for Qdqn {
    fn act(&mut self, state: usize, ctx: &mut StepContext) -> Result<usize> {
        let eps = ctx.epsilon(&self.agent.config().epsilon);
        self.agent.select_action(state, eps, ctx.rng, ctx.ledger)
    }

    fn observe(&mut self, transition: &Transition, ctx: &mut StepContext) -> Result<()> {
        self.agent.remember(*transition);
        self.agent.update(ctx.rng, ctx.ledger)?;
        Ok(())
    }

    fn end_episode(&mut self, _ctx: &mut StepContext) -> Result<()> {
        Ok(())
    }

    fn qubit_count(&self) -> usize {
        self.agent.model().spec().n_qubits
    }
}

struct Fe {
    agent: FeAgent,
}

impl Agent for Fe {
    fn act(&mut self, state: usize, ctx: &mut StepContext) -> Result<usize> {
        let eps = ctx.epsilon(&self.agent.config().epsilon);
        self.agent.act(state, eps, ctx.rng, ctx.ledger)
    }

    fn observe(&mut self, transition: &Transition, ctx: &mut StepContext) -> Result<()> {
        // also pre-selects the next action, so the schedule is read here too
        let eps = ctx.epsilon(&self.agent.config().epsilon);
        self.agent.observe(transition, eps, ctx.rng, ctx.ledger)?;
        Ok(())
    }

    fn end_episode(&mut self, _ctx: &mut StepContext) -> Result<()> {
        self.agent.end_episode();
        Ok(())
    }

    fn qubit_count(&self) -> usize {
        self.agent.qubit_count()
    }
}

struct Aa {
    agent: AaAgent,
}

impl Agent for Aa {
    fn act(&mut self, state: usize, ctx: &mut StepContext) -> Result<usize> {
        self.agent.select_action(state, ctx.rng, ctx.ledger)
    }

    fn observe(&mut self, transition: &Transition, _ctx: &mut StepContext) -> Result<()> {
        self.agent.observe(transition)?;
        Ok(())
    }

    fn end_episode(&mut self, _ctx: &mut StepContext) -> Result<()> {
        Ok(())
    }

    fn qubit_count(&self) -> usize {
        self.agent.qubit_count()
    }
}

/// Builds the configured agent; any random initialization draws from `rng`.
pub fn build_agent(
    config: &AgentConfig,
    timing: TimingModel,
    n_states: usize,
    n_actions: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Box<dyn Agent>> {
    let pqc = |rng: &mut ChaCha8Rng| -> Result<(PqcModel, ParamSet)> {
        let spec = AnsatzSpec::for_problem(config.encoding, config.ansatz_variant, config.n_layers, n_states, n_actions)?;
        let params = ParamSet::init(&spec, rng);
        Ok((PqcModel::new(spec, timing)?, params))
    };
    Ok(match config.family {
        AgentFamily::Qpg => {
            let (model, params) = pqc(rng)?;
            Box::new(Qpg {
                agent: QpgAgent::new(model, params, config.qpg)?,
                episode: Vec::new(),
            })
        }
        AgentFamily::Qdqn => {
            let (model, params) = pqc(rng)?;
            Box::new(Qdqn {
                agent: QdqnAgent::new(model, params, config.qdqn)?,
            })
        }
        AgentFamily::Fe => Box::new(Fe {
            agent: FeAgent::new(config.fe.clone(), config.encoding, n_states, n_actions, timing, rng)?,
        }),
        AgentFamily::Aa => Box::new(Aa {
            agent: AaAgent::new(config.aa, n_states, n_actions, timing)?,
        }),
    })
}
