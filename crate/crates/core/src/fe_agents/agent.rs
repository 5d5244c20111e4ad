use rand::Rng;
use serde::{Deserialize, Serialize};

use super::anneal::{sa_sample, SaSchedule};
use super::free_energy::{estimate_free_energy, exact_classical, exact_quantum, FreeEnergyEstimate};
use super::model::QbmModel;
use super::replica::replica_transform;
use crate::ansatz::Encoding;
use crate::envs::Transition;
use crate::error::{Error, Result};
use crate::pqc_agents::argmax;
use crate::qsim::{CostLedger, TimingModel};
use crate::schedule::EpsilonSchedule;

/// How a free energy is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Simulated annealing of the replica-stacked model, one anneal job per call.
    Sa,
    /// Exact enumeration (zero field) or dense diagonalization; free of charge.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeConfig {
    pub hidden_layers: Vec<usize>,
    pub transverse_field: f64,
    pub beta: f64,
    pub replicas: usize,
    pub estimator: Estimator,
    pub schedule: SaSchedule,
    pub learning_rate: f64,
    /// Multiplier applied to the learning rate after every update.
    pub lr_decay: f64,
    pub gamma: f64,
    pub epsilon: EpsilonSchedule,
    /// Count the replica chain energy in the mean energy.
    pub include_chain_energy: bool,
    /// Initial weights are drawn from `[-init_scale, init_scale]`.
    pub init_scale: f64,
}

impl Default for FeConfig {
    fn default() -> Self {
        Self {
            hidden_layers: vec![4, 4],
            transverse_field: 0.506,
            beta: 2.0,
            replicas: 5,
            estimator: Estimator::Sa,
            schedule: SaSchedule::default(),
            learning_rate: 0.01,
            lr_decay: 0.999,
            gamma: 0.95,
            epsilon: EpsilonSchedule::default(),
            include_chain_energy: false,
            init_scale: 0.1,
        }
    }
}

impl FeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_layers.is_empty() || self.hidden_layers.contains(&0) {
            return Err(Error::Config("fe.hidden_layers must be non-empty and non-zero".into()));
        }
        if !(self.beta > 0.0) || !(self.transverse_field >= 0.0) {
            return Err(Error::Config("fe needs beta > 0 and transverse_field >= 0".into()));
        }
        if self.replicas == 0 {
            return Err(Error::Config("fe.replicas must be at least 1".into()));
        }
        if self.estimator == Estimator::Sa && self.replicas > 1 && self.transverse_field == 0.0 {
            return Err(Error::Config(
                "fe.replicas > 1 needs a positive transverse field; use replicas = 1 for the classical model".into(),
            ));
        }
        if self.learning_rate < 0.0 || !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return Err(Error::Config("fe needs learning_rate >= 0 and lr_decay in (0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config("fe.gamma must lie in [0, 1]".into()));
        }
        if self.init_scale < 0.0 {
            return Err(Error::Config("fe.init_scale must be non-negative".into()));
        }
        self.schedule.validate()?;
        self.epsilon.validate()
    }
}

/// Everything needed to turn a model and a state-action pair into a free energy.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluator {
    pub estimator: Estimator,
    pub replicas: usize,
    pub schedule: SaSchedule,
    pub include_chain_energy: bool,
    pub timing: TimingModel,
}

impl Evaluator {
    pub fn from_config(config: &FeConfig, timing: TimingModel) -> Self {
        Self {
            estimator: config.estimator,
            replicas: config.replicas,
            schedule: config.schedule,
            include_chain_energy: config.include_chain_energy,
            timing,
        }
    }

    pub fn evaluate<R: Rng + ?Sized>(
        &self,
        model: &QbmModel,
        state: usize,
        action: usize,
        rng: &mut R,
        ledger: &CostLedger,
    ) -> Result<FreeEnergyEstimate> {
        let clamped = model.clamp(state, action)?;
        match self.estimator {
            Estimator::Sa => {
                let ising = replica_transform(&clamped, self.replicas, model.transverse_field, model.beta)?;
                let samples = sa_sample(&ising, &self.schedule, &self.timing, rng, ledger)?;
                estimate_free_energy(&samples, &ising, model.beta, self.include_chain_energy)
            }
            Estimator::Exact if model.transverse_field == 0.0 => exact_classical(&clamped, model.beta),
            Estimator::Exact => exact_quantum(&clamped, model.transverse_field, model.beta),
        }
    }
}

/// Exact free energy of a state-action pair: enumeration without a transverse
/// field, dense diagonalization with one.
pub fn exact_free_energy(model: &QbmModel, state: usize, action: usize) -> Result<FreeEnergyEstimate> {
    let clamped = model.clamp(state, action)?;
    if model.transverse_field == 0.0 {
        exact_classical(&clamped, model.beta)
    } else {
        exact_quantum(&clamped, model.transverse_field, model.beta)
    }
}

/// `Q(s, a) = -F(s, a)`.
pub fn fe_q_value<R: Rng + ?Sized>(
    model: &QbmModel,
    state: usize,
    action: usize,
    evaluator: &Evaluator,
    rng: &mut R,
    ledger: &CostLedger,
) -> Result<f64> {
    Ok(evaluator.evaluate(model, state, action, rng, ledger)?.q_value())
}

/// Temporal-difference step on the weights. `estimate` must come from the
/// same evaluation as `f_now`; `f_next` is ignored for terminal transitions.
/// Returns the TD error.
pub fn fe_td_update(
    model: &mut QbmModel,
    transition: &Transition,
    f_now: f64,
    f_next: f64,
    estimate: &FreeEnergyEstimate,
    alpha: f64,
    gamma: f64,
) -> Result<f64> {
    if estimate.n_hidden() != model.n_hidden() {
        return Err(Error::Argument(format!(
            "estimate covers {} hidden units, model has {}",
            estimate.n_hidden(),
            model.n_hidden()
        )));
    }
    let delta = if transition.terminal {
        transition.reward + f_now
    } else {
        transition.reward - gamma * f_next + f_now
    };
    let step = alpha * delta;
    if step == 0.0 {
        return Ok(delta);
    }
    let v = model.visible(transition.state, transition.action)?;
    let nh1 = model.n_first_hidden();
    for (v_idx, vv) in v.iter().enumerate() {
        for h in 0..nh1 {
            model.w_vh[v_idx * nh1 + h] += step * vv * estimate.magnetizations[h];
        }
    }
    for (w, &(a, b)) in model.w_hh.iter_mut().zip(&model.hh_edges) {
        *w += step * estimate.correlation(a, b);
    }
    Ok(delta)
}

/// Free-energy Q-learner with epsilon-greedy selection over all actions.
///
/// The evaluation of the action chosen for the next state doubles as its
/// `F_now` on the following step, so each step costs `|A|` evaluations.
#[derive(Debug, Clone)]
pub struct FeAgent {
    model: QbmModel,
    config: FeConfig,
    evaluator: Evaluator,
    alpha: f64,
    pending: Option<(usize, usize, FreeEnergyEstimate)>,
}

impl FeAgent {
    pub fn new<R: Rng + ?Sized>(
        config: FeConfig,
        encoding: Encoding,
        n_states: usize,
        n_actions: usize,
        timing: TimingModel,
        rng: &mut R,
    ) -> Result<Self> {
        config.validate()?;
        let mut model = QbmModel::new(
            encoding,
            n_states,
            n_actions,
            config.hidden_layers.clone(),
            config.transverse_field,
            config.beta,
        )?;
        model.randomize(config.init_scale, rng);
        Ok(Self {
            model,
            evaluator: Evaluator::from_config(&config, timing),
            alpha: config.learning_rate,
            config,
            pending: None,
        })
    }

    pub fn model(&self) -> &QbmModel {
        &self.model
    }

    pub fn model_mut(&mut self) -> &mut QbmModel {
        &mut self.model
    }

    pub fn config(&self) -> &FeConfig {
        &self.config
    }

    pub fn evaluator(&self) -> &Evaluator {
        &self.evaluator
    }

    pub fn learning_rate(&self) -> f64 {
        self.alpha
    }

    /// Number of hidden units the annealer or quantum device must host.
    pub fn qubit_count(&self) -> usize {
        match self.config.estimator {
            Estimator::Sa => self.model.n_hidden() * self.config.replicas,
            Estimator::Exact => self.model.n_hidden(),
        }
    }

    pub fn evaluate<R: Rng + ?Sized>(
        &self,
        state: usize,
        action: usize,
        rng: &mut R,
        ledger: &CostLedger,
    ) -> Result<FreeEnergyEstimate> {
        self.evaluator.evaluate(&self.model, state, action, rng, ledger)
    }

    /// Evaluates every action in `state` and picks one epsilon-greedily.
    pub fn choose<R: Rng + ?Sized>(
        &self,
        state: usize,
        epsilon: f64,
        rng: &mut R,
        ledger: &CostLedger,
    ) -> Result<(usize, FreeEnergyEstimate)> {
        let mut estimates = (0..self.model.n_actions)
            .map(|a| self.evaluate(state, a, rng, ledger))
            .collect::<Result<Vec<_>>>()?;
        let action = if rng.gen::<f64>() < epsilon {
            rng.gen_range(0..self.model.n_actions)
        } else {
            let q: Vec<f64> = estimates.iter().map(|e| e.q_value()).collect();
            argmax(&q)
        };
        Ok((action, estimates.swap_remove(action)))
    }

    pub fn act<R: Rng + ?Sized>(
        &mut self,
        state: usize,
        epsilon: f64,
        rng: &mut R,
        ledger: &CostLedger,
    ) -> Result<usize> {
        if let Some((s, a, _)) = &self.pending {
            if *s == state {
                return Ok(*a);
            }
        }
        let (a, est) = self.choose(state, epsilon, rng, ledger)?;
        self.pending = Some((state, a, est));
        Ok(a)
    }

    /// Learns from a transition and pre-selects the next action. Returns the
    /// TD error.
    pub fn observe<R: Rng + ?Sized>(
        &mut self,
        t: &Transition,
        epsilon: f64,
        rng: &mut R,
        ledger: &CostLedger,
    ) -> Result<f64> {
        let now = match self.pending.take() {
            Some((s, a, est)) if s == t.state && a == t.action => est,
            _ => self.evaluate(t.state, t.action, rng, ledger)?,
        };
        let f_next = if t.terminal {
            0.0
        } else {
            let (a_next, est_next) = self.choose(t.next_state, epsilon, rng, ledger)?;
            let f = est_next.free_energy;
            if !t.done {
                self.pending = Some((t.next_state, a_next, est_next));
            }
            f
        };
        let delta = fe_td_update(
            &mut self.model,
            t,
            now.free_energy,
            f_next,
            &now,
            self.alpha,
            self.config.gamma,
        )?;
        self.alpha *= self.config.lr_decay;
        Ok(delta)
    }

    pub fn end_episode(&mut self) {
        self.pending = None;
    }
}
