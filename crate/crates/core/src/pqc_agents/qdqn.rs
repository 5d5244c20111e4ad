//! Deep-Q learning with a circuit approximator, replay and a target copy.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, select_action_eps_greedy, PqcModel, ReplayBuffer};
use crate::ansatz::ParamSet;
use crate::envs::Transition;
use crate::error::{Error, Result};
use crate::qsim::CostLedger;
use crate::schedule::EpsilonSchedule;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QdqnConfig {
    pub lr_circuit: f64,
    pub lr_output: f64,
    pub gamma: f64,
    pub buffer_capacity: usize,
    pub batch_size: usize,
    /// Learner steps between copies of the online parameters to the target.
    pub target_update_interval: u64,
    pub epsilon: EpsilonSchedule,
}

impl Default for QdqnConfig {
    fn default() -> Self {
        Self {
            lr_circuit: 0.01,
            lr_output: 0.01,
            gamma: 0.95,
            buffer_capacity: 10_000,
            batch_size: 16,
            target_update_interval: 25,
            epsilon: EpsilonSchedule::default(),
        }
    }
}

impl QdqnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lr_circuit < 0.0 || self.lr_output < 0.0 {
            return Err(Error::Config("QDQN learning rates must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config("QDQN gamma must lie in [0, 1]".into()));
        }
        if self.batch_size == 0 || self.buffer_capacity < self.batch_size {
            return Err(Error::Config(
                "QDQN buffer capacity must be at least the (positive) batch size".into(),
            ));
        }
        if self.target_update_interval == 0 {
            return Err(Error::Config("target_update_interval must be at least 1".into()));
        }
        self.epsilon.validate()
    }
}

#[derive(Debug, Clone)]
pub struct QdqnAgent {
    model: PqcModel,
    params: ParamSet,
    target: ParamSet,
    buffer: ReplayBuffer,
    config: QdqnConfig,
    learner_steps: u64,
}

impl QdqnAgent {
    pub fn new(model: PqcModel, params: ParamSet, config: QdqnConfig) -> Result<Self> {
        config.validate()?;
        if params.circuit_params().len() != model.spec().n_circuit_params()
            || params.w.len() != model.spec().n_actions
        {
            return Err(Error::Config("parameter set does not match the ansatz".into()));
        }
        Ok(Self {
            model,
            target: params.clone(),
            params,
            buffer: ReplayBuffer::new(config.buffer_capacity),
            config,
            learner_steps: 0,
        })
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn target_params(&self) -> &ParamSet {
        &self.target
    }

    pub fn set_params(&mut self, params: ParamSet) {
        self.params = params;
    }

    pub fn config(&self) -> &QdqnConfig {
        &self.config
    }

    pub fn model(&self) -> &PqcModel {
        &self.model
    }

    pub fn learner_steps(&self) -> u64 {
        self.learner_steps
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    /// `Q(s, a) = <Z_a> w_a` for all actions, one execution.
    pub fn q_values(&self, state: usize, use_target: bool, ledger: &CostLedger) -> Result<Vec<f64>> {
        let p = if use_target { &self.target } else { &self.params };
        let e = self.model.expectations(state, p, ledger)?;
        Ok(e.iter().zip(&p.w).map(|(e, w)| e * w).collect())
    }

    pub fn select_action<R: Rng + ?Sized>(
        &self,
        state: usize,
        epsilon: f64,
        rng: &mut R,
        ledger: &CostLedger,
    ) -> Result<usize> {
        select_action_eps_greedy(self.model.spec().n_actions, epsilon, rng, || {
            self.q_values(state, false, ledger)
        })
    }

    pub fn remember(&mut self, t: Transition) {
        self.buffer.push(t);
    }

    /// TD target `r + gamma * max_a Q_target(s', a)`, or `r` at an absorbing state.
    pub fn td_target(reward: f64, gamma: f64, terminal: bool, next_max: f64) -> f64 {
        if terminal {
            reward
        } else {
            reward + gamma * next_max
        }
    }

    /// One learner step on a uniformly sampled batch. Returns `false` without
    /// touching anything when the buffer holds fewer than `batch_size` items.
    ///
    /// Minimizes the batch-mean squared TD error. Each distinct state (and
    /// next state) in the batch is executed once; each distinct state costs one
    /// shift-rule gradient.
    pub fn update<R: Rng + ?Sized>(&mut self, rng: &mut R, ledger: &CostLedger) -> Result<bool> {
        let batch_size = self.config.batch_size;
        if self.buffer.len() < batch_size {
            return Ok(false);
        }
        let batch = self.buffer.sample(batch_size, rng);

        let mut next_max: BTreeMap<usize, f64> = BTreeMap::new();
        for t in batch.iter().filter(|t| !t.terminal) {
            if !next_max.contains_key(&t.next_state) {
                let q = self.q_values(t.next_state, true, ledger)?;
                next_max.insert(t.next_state, q[argmax(&q)]);
            }
        }
        let mut expectations: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for t in &batch {
            if !expectations.contains_key(&t.state) {
                let e = self.model.expectations(t.state, &self.params, ledger)?;
                expectations.insert(t.state, e);
            }
        }

        let n_actions = self.model.spec().n_actions;
        let mut obs_weights: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        let mut w_grad = vec![0.0; n_actions];
        for t in &batch {
            let e = &expectations[&t.state];
            let q = e[t.action] * self.params.w[t.action];
            let y = Self::td_target(
                t.reward,
                self.config.gamma,
                t.terminal,
                next_max.get(&t.next_state).copied().unwrap_or(0.0),
            );
            let dloss_dq = 2.0 * (q - y) / batch_size as f64;
            w_grad[t.action] += dloss_dq * e[t.action];
            obs_weights
                .entry(t.state)
                .or_insert_with(|| vec![0.0; n_actions])[t.action] += dloss_dq * self.params.w[t.action];
        }

        let mut circuit_grad = vec![0.0; self.model.spec().n_circuit_params()];
        for (state, weights) in &obs_weights {
            let g = self.model.circuit_grad(*state, &self.params, weights, ledger)?;
            for (acc, gi) in circuit_grad.iter_mut().zip(g) {
                *acc += gi;
            }
        }
        self.params
            .add_to_circuit_params(&circuit_grad, -self.config.lr_circuit);
        for (w, g) in self.params.w.iter_mut().zip(&w_grad) {
            *w -= self.config.lr_output * g;
        }

        self.learner_steps += 1;
        if self.learner_steps % self.config.target_update_interval == 0 {
            self.target = self.params.clone();
        }
        Ok(true)
    }
}
