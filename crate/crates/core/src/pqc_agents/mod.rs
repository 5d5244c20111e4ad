//! Policy-gradient (QPG) and deep-Q (QDQN) agents built on the ansatz.
//!
//! Both agents read action values as `<Z_a> * w_a` from one circuit execution
//! per state. Circuit parameters (theta, lambda) are trained with
//! parameter-shift gradients; the output scaling `w` is differentiated
//! classically and costs no executions.

mod qdqn;
mod qpg;
mod replay;

pub use qdqn::{QdqnAgent, QdqnConfig};
pub use qpg::{log_policy_value_grad, policy_from_values, PolicyMode, QpgAgent, QpgConfig};
pub use replay::ReplayBuffer;

use rand::Rng;

use crate::ansatz::{build_circuit, encode_state, AnsatzSpec, ParamSet};
use crate::error::{Error, Result};
use crate::qsim::{self, Circuit, CostLedger, TimingModel};

/// An ansatz with one pre-built circuit per environment state.
#[derive(Debug, Clone)]
pub struct PqcModel {
    spec: AnsatzSpec,
    circuits: Vec<Circuit>,
    timing: TimingModel,
}

impl PqcModel {
    pub fn new(spec: AnsatzSpec, timing: TimingModel) -> Result<Self> {
        spec.validate()?;
        let circuits = (0..spec.n_states)
            .map(|s| build_circuit(&spec, &encode_state(spec.encoding, s, spec.n_states)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spec,
            circuits,
            timing,
        })
    }

    pub fn spec(&self) -> &AnsatzSpec {
        &self.spec
    }

    pub fn timing(&self) -> &TimingModel {
        &self.timing
    }

    pub fn circuit(&self, state: usize) -> Result<&Circuit> {
        self.circuits.get(state).ok_or_else(|| {
            Error::Argument(format!(
                "state {state} out of range for {} states",
                self.circuits.len()
            ))
        })
    }

    /// `<Z_a>` for every action, one execution.
    pub fn expectations(&self, state: usize, params: &ParamSet, ledger: &CostLedger) -> Result<Vec<f64>> {
        qsim::run_circuit(self.circuit(state)?, &params.circuit_params(), &self.timing, ledger)
    }

    /// Shift-rule gradient of `sum_a weights[a] * <Z_a>` over theta and lambda.
    pub fn circuit_grad(
        &self,
        state: usize,
        params: &ParamSet,
        weights: &[f64],
        ledger: &CostLedger,
    ) -> Result<Vec<f64>> {
        qsim::parameter_shift_grad(
            self.circuit(state)?,
            &params.circuit_params(),
            weights,
            &self.timing,
            ledger,
        )
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Random action with probability `epsilon`, otherwise the greedy one.
///
/// `q_values` is only evaluated when the greedy branch is taken, so
/// exploratory steps cost no circuit executions.
pub fn select_action_eps_greedy<R, F>(n_actions: usize, epsilon: f64, rng: &mut R, q_values: F) -> Result<usize>
where
    R: Rng + ?Sized,
    F: FnOnce() -> Result<Vec<f64>>,
{
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Argument(format!("epsilon {epsilon} outside [0, 1]")));
    }
    if rng.gen::<f64>() < epsilon {
        Ok(rng.gen_range(0..n_actions))
    } else {
        Ok(argmax(&q_values()?))
    }
}
