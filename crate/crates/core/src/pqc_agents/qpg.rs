//! Episodic REINFORCE over the circuit policy.

use std::collections::{BTreeMap, HashMap};

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::PqcModel;
use crate::ansatz::ParamSet;
use crate::envs::Transition;
use crate::error::{Error, Result};
use crate::qsim::CostLedger;

/// Offset added after shifting scaled expectations to be non-negative.
const RATIO_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyMode {
    /// `pi(a) ∝ <Z_a> w_a`, shifted to be non-negative.
    Ratio,
    Softmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QpgConfig {
    pub lr_circuit: f64,
    pub lr_output: f64,
    pub gamma: f64,
    pub policy_mode: PolicyMode,
    /// Subtract the episode's mean return-to-go from every G_t.
    pub baseline: bool,
}

impl Default for QpgConfig {
    fn default() -> Self {
        Self {
            lr_circuit: 0.025,
            lr_output: 0.1,
            gamma: 0.99,
            policy_mode: PolicyMode::Ratio,
            baseline: false,
        }
    }
}

impl QpgConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr_circuit > 0.0 && self.lr_output > 0.0) {
            return Err(Error::Config("QPG learning rates must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config("QPG gamma must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Action distribution from scaled expectations `values[a] = <Z_a> w_a`.
pub fn policy_from_values(mode: PolicyMode, values: &[f64]) -> Result<Vec<f64>> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateDistribution(format!("non-finite policy values {values:?}")));
    }
    match mode {
        PolicyMode::Softmax => {
            let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = values.iter().map(|v| (v - max).exp()).collect();
            let z: f64 = exps.iter().sum();
            Ok(exps.into_iter().map(|e| e / z).collect())
        }
        PolicyMode::Ratio => {
            let shift = ratio_shift(values);
            let shifted: Vec<f64> = values.iter().map(|v| v + shift).collect();
            let z: f64 = shifted.iter().sum();
            if !(z > 0.0 && z.is_finite()) {
                return Err(Error::DegenerateDistribution(format!("ratio policy normalizer {z}")));
            }
            Ok(shifted.into_iter().map(|v| v / z).collect())
        }
    }
}

fn ratio_shift(values: &[f64]) -> f64 {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    (-min).max(0.0) + RATIO_FLOOR
}

/// `d log pi(action) / d values[o]` for every `o`.
///
/// In ratio mode the shift depends on the current minimum; the derivative
/// treats the argmin as locally fixed.
pub fn log_policy_value_grad(mode: PolicyMode, values: &[f64], action: usize) -> Result<Vec<f64>> {
    let probs = policy_from_values(mode, values)?;
    match mode {
        PolicyMode::Softmax => Ok((0..values.len())
            .map(|o| if o == action { 1.0 } else { 0.0 } - probs[o])
            .collect()),
        PolicyMode::Ratio => {
            let n = values.len() as f64;
            let shift = ratio_shift(values);
            let shifted: Vec<f64> = values.iter().map(|v| v + shift).collect();
            let z: f64 = shifted.iter().sum();
            let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let argmin = values.iter().position(|v| *v == min).unwrap_or(0);
            Ok((0..values.len())
                .map(|o| {
                    let dshift = if min < 0.0 && o == argmin { -1.0 } else { 0.0 };
                    let own = if o == action { 1.0 } else { 0.0 } + dshift;
                    own / shifted[action] - (1.0 + n * dshift) / z
                })
                .collect())
        }
    }
}

/// Gradient of one objective term, split by parameter class.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyGrad {
    /// Over `ParamSet::circuit_params()` ordering.
    pub circuit: Vec<f64>,
    pub w: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct QpgAgent {
    model: PqcModel,
    params: ParamSet,
    config: QpgConfig,
    /// Expectations per state under the current parameters, filled while
    /// acting and reused by the update.
    cache: HashMap<usize, Vec<f64>>,
}

impl QpgAgent {
    pub fn new(model: PqcModel, params: ParamSet, config: QpgConfig) -> Result<Self> {
        config.validate()?;
        if params.circuit_params().len() != model.spec().n_circuit_params()
            || params.w.len() != model.spec().n_actions
        {
            return Err(Error::Config("parameter set does not match the ansatz".into()));
        }
        Ok(Self {
            model,
            params,
            config,
            cache: HashMap::new(),
        })
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn set_params(&mut self, params: ParamSet) {
        self.params = params;
        self.cache.clear();
    }

    pub fn model(&self) -> &PqcModel {
        &self.model
    }

    pub fn config(&self) -> &QpgConfig {
        &self.config
    }

    fn expectations(&mut self, state: usize, ledger: &CostLedger) -> Result<Vec<f64>> {
        if let Some(e) = self.cache.get(&state) {
            return Ok(e.clone());
        }
        let e = self.model.expectations(state, &self.params, ledger)?;
        self.cache.insert(state, e.clone());
        Ok(e)
    }

    fn values(&self, expectations: &[f64]) -> Result<Vec<f64>> {
        if self.config.policy_mode == PolicyMode::Ratio && self.params.w.iter().all(|w| *w == 0.0) {
            return Err(Error::DegenerateDistribution(
                "all output weights are zero; the ratio policy is undefined".into(),
            ));
        }
        Ok(expectations.iter().zip(&self.params.w).map(|(e, w)| e * w).collect())
    }

    /// Action probabilities in `state`. Costs one execution unless the state
    /// was already evaluated under the current parameters.
    pub fn policy(&mut self, state: usize, ledger: &CostLedger) -> Result<Vec<f64>> {
        let e = self.expectations(state, ledger)?;
        policy_from_values(self.config.policy_mode, &self.values(&e)?)
    }

    pub fn sample_action<R: Rng + ?Sized>(&mut self, state: usize, rng: &mut R, ledger: &CostLedger) -> Result<usize> {
        let probs = self.policy(state, ledger)?;
        let dist = WeightedIndex::new(&probs)
            .map_err(|e| Error::DegenerateDistribution(format!("{e}: {probs:?}")))?;
        Ok(dist.sample(rng))
    }

    /// Loss weights on `<Z_o>` and the `w` gradient of `log pi(action|state)`.
    fn log_prob_terms(&mut self, state: usize, action: usize, ledger: &CostLedger) -> Result<(Vec<f64>, Vec<f64>)> {
        let e = self.expectations(state, ledger)?;
        let x = self.values(&e)?;
        let probs = policy_from_values(self.config.policy_mode, &x)?;
        if probs.get(action).copied().unwrap_or(0.0) <= 0.0 {
            return Err(Error::Numerical(format!(
                "chosen action {action} has zero probability in state {state}"
            )));
        }
        let dx = log_policy_value_grad(self.config.policy_mode, &x, action)?;
        let obs_weights = dx.iter().zip(&self.params.w).map(|(d, w)| d * w).collect();
        let w_grad = dx.iter().zip(&e).map(|(d, e)| d * e).collect();
        Ok((obs_weights, w_grad))
    }

    /// Full gradient of `log pi(action|state)`.
    pub fn log_prob_gradient(&mut self, state: usize, action: usize, ledger: &CostLedger) -> Result<PolicyGrad> {
        let (obs_weights, w) = self.log_prob_terms(state, action, ledger)?;
        let circuit = self.model.circuit_grad(state, &self.params, &obs_weights, ledger)?;
        Ok(PolicyGrad { circuit, w })
    }

    /// One REINFORCE ascent step on `sum_t G_t log pi(a_t|s_t)`.
    ///
    /// Terms sharing a state are merged so each distinct state costs one
    /// shift-rule gradient (two executions per circuit parameter). States whose
    /// merged weights are all zero are skipped.
    pub fn update(&mut self, episode: &[Transition], ledger: &CostLedger) -> Result<()> {
        if episode.is_empty() {
            return Err(Error::Argument("empty episode".into()));
        }
        let mut returns = vec![0.0; episode.len()];
        let mut g = 0.0;
        for (t, tr) in episode.iter().enumerate().rev() {
            g = tr.reward + self.config.gamma * g;
            returns[t] = g;
        }
        if self.config.baseline {
            let mean = returns.iter().sum::<f64>() / returns.len() as f64;
            returns.iter_mut().for_each(|r| *r -= mean);
        }

        let n_actions = self.model.spec().n_actions;
        let mut obs_weights: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        let mut w_grad = vec![0.0; n_actions];
        for (tr, &ret) in episode.iter().zip(&returns) {
            let (ow, wg) = self.log_prob_terms(tr.state, tr.action, ledger)?;
            let acc = obs_weights
                .entry(tr.state)
                .or_insert_with(|| vec![0.0; n_actions]);
            for o in 0..n_actions {
                acc[o] += ret * ow[o];
                w_grad[o] += ret * wg[o];
            }
        }

        let mut circuit_grad = vec![0.0; self.model.spec().n_circuit_params()];
        for (state, weights) in &obs_weights {
            if weights.iter().all(|w| *w == 0.0) {
                continue;
            }
            let g = self.model.circuit_grad(*state, &self.params, weights, ledger)?;
            for (acc, gi) in circuit_grad.iter_mut().zip(g) {
                *acc += gi;
            }
        }
        self.params
            .add_to_circuit_params(&circuit_grad, self.config.lr_circuit);
        for (w, g) in self.params.w.iter_mut().zip(&w_grad) {
            *w += self.config.lr_output * g;
        }
        self.cache.clear();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{AnsatzSpec, Encoding, Variant};
    use crate::qsim::TimingModel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn policy_examples() {
        let p = policy_from_values(PolicyMode::Ratio, &[0.5; 4]).unwrap();
        for v in p {
            assert!((v - 0.25).abs() < 1e-7);
        }
        let p = policy_from_values(PolicyMode::Ratio, &[0.2, 0.6, 0.1, 0.1]).unwrap();
        for (a, b) in p.iter().zip([0.2, 0.6, 0.1, 0.1]) {
            assert!((a - b).abs() < 1e-7);
        }
        let p = policy_from_values(PolicyMode::Softmax, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let e = std::f64::consts::E;
        assert!((p[0] - e / (e + 3.0)).abs() < 1e-12);
        assert!((p[1] - 1.0 / (e + 3.0)).abs() < 1e-12);
        assert!((p[0] - 0.475).abs() < 1e-3 && (p[3] - 0.175).abs() < 1e-3);
    }

    #[test]
    fn ratio_policy_handles_negative_values() {
        let p = policy_from_values(PolicyMode::Ratio, &[-0.5, 0.5, 0.0, 0.25]).unwrap();
        assert!(p.iter().all(|v| *v >= 0.0));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p[0] < 1e-7);
    }

    #[test]
    fn value_gradient_matches_finite_differences() {
        let h = 1e-6;
        for mode in [PolicyMode::Ratio, PolicyMode::Softmax] {
            for x in [[0.3, -0.2, 0.7, 0.1], [0.2, 0.6, 0.1, 0.15], [-0.9, -0.1, 0.4, 0.0]] {
                for a in 0..4 {
                    let g = log_policy_value_grad(mode, &x, a).unwrap();
                    for o in 0..4 {
                        let mut up = x;
                        up[o] += h;
                        let mut dn = x;
                        dn[o] -= h;
                        let fd = (policy_from_values(mode, &up).unwrap()[a].ln()
                            - policy_from_values(mode, &dn).unwrap()[a].ln())
                            / (2.0 * h);
                        assert!((fd - g[o]).abs() < 1e-4, "{mode:?} x={x:?} a={a} o={o}: {fd} vs {}", g[o]);
                    }
                }
            }
        }
    }

    fn agent(mode: PolicyMode, seed: u64) -> QpgAgent {
        let spec = AnsatzSpec::new(2, 2, Variant::Full, Encoding::Binary, 4, 2).unwrap();
        let model = PqcModel::new(spec.clone(), TimingModel::default()).unwrap();
        let mut params = ParamSet::init(&spec, &mut ChaCha8Rng::seed_from_u64(seed));
        params.w = vec![1.3, 0.8];
        QpgAgent::new(
            model,
            params,
            QpgConfig {
                policy_mode: mode,
                ..QpgConfig::default()
            },
        )
        .unwrap()
    }

    fn step(state: usize, action: usize, reward: f64) -> Transition {
        Transition {
            state,
            action,
            reward,
            next_state: state,
            done: true,
            terminal: true,
        }
    }

    #[test]
    fn zero_return_leaves_parameters_unchanged() {
        let mut a = agent(PolicyMode::Ratio, 1);
        let before = a.params().clone();
        let ledger = CostLedger::new();
        a.update(&[step(1, 0, 0.0)], &ledger).unwrap();
        assert_eq!(a.params(), &before);
    }

    #[test]
    fn log_prob_gradient_matches_finite_differences() {
        let ledger = CostLedger::new();
        for mode in [PolicyMode::Softmax, PolicyMode::Ratio] {
            for seed in 0..4 {
                let mut a = agent(mode, seed);
                let (state, action) = (seed as usize % 4, 1);
                let g = a.log_prob_gradient(state, action, &ledger).unwrap();
                let base = a.params().clone();
                let logp = |a: &mut QpgAgent, p: ParamSet| {
                    a.set_params(p);
                    a.policy(state, &ledger).unwrap()[action].ln()
                };
                let h = 1e-5;
                let n_theta = base.theta.len();
                for i in 0..base.circuit_params().len() {
                    let mut up = base.clone();
                    let mut dn = base.clone();
                    if i < n_theta {
                        up.theta[i] += h;
                        dn.theta[i] -= h;
                    } else {
                        up.lambda[i - n_theta] += h;
                        dn.lambda[i - n_theta] -= h;
                    }
                    let fd = (logp(&mut a, up) - logp(&mut a, dn)) / (2.0 * h);
                    assert!((fd - g.circuit[i]).abs() < 1e-4, "{mode:?} param {i}: {fd} vs {}", g.circuit[i]);
                }
                for i in 0..base.w.len() {
                    let mut up = base.clone();
                    let mut dn = base.clone();
                    up.w[i] += h;
                    dn.w[i] -= h;
                    let fd = (logp(&mut a, up) - logp(&mut a, dn)) / (2.0 * h);
                    assert!((fd - g.w[i]).abs() < 1e-4, "{mode:?} w{i}: {fd} vs {}", g.w[i]);
                }
            }
        }
    }

    #[test]
    fn identical_episodes_give_identical_updates() {
        let ep = [step(0, 1, 0.0), step(2, 0, -0.1), step(3, 1, 1.0)];
        let mut a = agent(PolicyMode::Ratio, 5);
        let mut b = agent(PolicyMode::Ratio, 5);
        a.update(&ep, &CostLedger::new()).unwrap();
        b.update(&ep, &CostLedger::new()).unwrap();
        assert_eq!(a.params(), b.params());
        assert_ne!(a.params(), agent(PolicyMode::Ratio, 5).params());
    }

    #[test]
    fn update_costs_two_executions_per_parameter_per_state() {
        let mut a = agent(PolicyMode::Softmax, 2);
        let ledger = CostLedger::new();
        a.policy(0, &ledger).unwrap();
        a.policy(3, &ledger).unwrap();
        assert_eq!(ledger.circuit_executions(), 2);
        let p = a.model().spec().n_circuit_params() as u64;
        a.update(&[step(0, 0, 0.5), step(3, 1, 0.5), step(0, 1, 0.5)], &ledger)
            .unwrap();
        assert_eq!(ledger.circuit_executions(), 2 + 2 * 2 * p);
    }

    #[test]
    fn zero_output_weights_are_degenerate_in_ratio_mode() {
        let mut a = agent(PolicyMode::Ratio, 0);
        let mut p = a.params().clone();
        p.w = vec![0.0, 0.0];
        a.set_params(p);
        assert!(matches!(
            a.policy(0, &CostLedger::new()),
            Err(Error::DegenerateDistribution(_))
        ));
    }
}
