//! Amplitude-amplification agent.
//!
//! Every state owns a small register whose measurement distribution is the
//! policy. After a transition the taken action is amplified with
//! `L = floor(k (R + V(s')))` Grover iterations and a TD(0) table tracks `V`.
//! Registers are sampled without collapse and persist across episodes.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::ceil_log2;
use crate::envs::Transition;
use crate::error::{Error, Result};
use crate::qsim::{CostLedger, Statevector, TimingModel};

/// One-qubit gates charged per register qubit for one Grover iteration
/// (phase oracle X-conjugation plus the H/X sandwich of the diffusion).
pub const GROVER_1Q_PER_QUBIT: u64 = 4;
/// Two-qubit gates charged per Grover iteration when the register has at
/// least two qubits (the multi-controlled phase, counted as one CZ).
pub const GROVER_2Q: u64 = 1;

/// `(one-qubit, two-qubit)` gate equivalents of one Grover iteration.
pub fn grover_gate_counts(m: usize) -> (u64, u64) {
    let two = if m >= 2 { GROVER_2Q } else { 0 };
    (GROVER_1Q_PER_QUBIT * m as u64, two)
}

/// Per-state action register: uniform preparation followed by Grover iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionRegister {
    state: Statevector,
    n_actions: usize,
    iterations: u64,
}

impl ActionRegister {
    /// Equal superposition over the `n_actions` valid basis states of
    /// `ceil(log2 n_actions)` qubits.
    pub fn uniform(n_actions: usize) -> Result<Self> {
        if n_actions == 0 {
            return Err(Error::Argument("register needs at least one action".into()));
        }
        let m = ceil_log2(n_actions);
        let amp = Complex64::new(1.0 / (n_actions as f64).sqrt(), 0.0);
        let amplitudes = (0..1usize << m)
            .map(|i| if i < n_actions { amp } else { Complex64::new(0.0, 0.0) })
            .collect();
        Ok(Self {
            state: Statevector::from_amplitudes(m, amplitudes)?,
            n_actions,
            iterations: 0,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.state.n_qubits()
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn statevector(&self) -> &Statevector {
        &self.state
    }

    /// Grover iterations applied since preparation.
    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.state.probabilities()[..self.n_actions].to_vec()
    }

    pub fn probability(&self, action: usize) -> f64 {
        self.state.probability(action)
    }

    /// Gate counts of the circuit preparing the current register.
    pub fn gate_counts(&self) -> (u64, u64) {
        let (one, two) = grover_gate_counts(self.n_qubits());
        (self.n_qubits() as u64 + self.iterations * one, self.iterations * two)
    }

    fn check(&self, action: usize) -> Result<()> {
        if action >= self.n_actions {
            return Err(Error::Argument(format!(
                "action {action} out of range for {} actions",
                self.n_actions
            )));
        }
        Ok(())
    }

    /// Phase flip on `|action>`, then reflection about the uniform state.
    fn iterate(&mut self, action: usize) {
        let n = self.n_actions;
        let amps = self.state.amplitudes_mut();
        amps[action] = -amps[action];
        let mean = amps[..n].iter().sum::<Complex64>() / n as f64;
        for a in &mut amps[..n] {
            *a = 2.0 * mean - *a;
        }
        self.iterations += 1;
    }

    /// Applies the Grover operator for `action` exactly `l` times.
    pub fn grover_update(&mut self, action: usize, l: u64) -> Result<()> {
        self.check(action)?;
        for _ in 0..l {
            self.iterate(action);
        }
        Ok(())
    }

    /// Largest `l' <= l` such that no single iteration lowers the marked
    /// probability.
    pub fn capped_iterations(&self, action: usize, l: u64) -> Result<u64> {
        self.check(action)?;
        let mut probe = self.clone();
        let mut p = probe.probability(action);
        for done in 0..l {
            probe.iterate(action);
            let next = probe.probability(action);
            if next < p - 1e-12 {
                return Ok(done);
            }
            p = next;
        }
        Ok(l)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let probs = self.probabilities();
        let total: f64 = probs.iter().sum();
        for (a, p) in probs.iter().enumerate() {
            acc += p / total;
            if u < acc {
                return a;
            }
        }
        self.n_actions - 1
    }
}

/// `max(0, floor(k (reward + v_next)))`.
pub fn compute_l(k: f64, reward: f64, v_next: f64) -> u64 {
    let x = k * (reward + v_next);
    if x.is_finite() && x > 0.0 {
        x.floor().min(u32::MAX as f64) as u64
    } else {
        0
    }
}

/// `V(s) += alpha (R + gamma V(s') - V(s))`, with `V(s') = 0` after a terminal move.
pub fn td0_update(values: &mut [f64], t: &Transition, alpha: f64, gamma: f64) {
    let next = if t.terminal { 0.0 } else { values[t.next_state] };
    values[t.state] += alpha * (t.reward + gamma * next - values[t.state]);
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AaConfig {
    /// Grover gain. Nothing is amplified until `k * (R + V(s'))` reaches 1.
    pub k: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// Stop amplifying before the marked probability would fall.
    pub overshoot_cap: bool,
}

impl Default for AaConfig {
    fn default() -> Self {
        Self {
            k: 2.0,
            alpha: 0.1,
            gamma: 0.95,
            overshoot_cap: true,
        }
    }
}

impl AaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k >= 0.0 && self.k.is_finite()) {
            return Err(Error::Config("aa.k must be a non-negative number".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) || !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config("aa.alpha and aa.gamma must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct AaAgent {
    config: AaConfig,
    timing: TimingModel,
    registers: Vec<ActionRegister>,
    values: Vec<f64>,
}

impl AaAgent {
    pub fn new(config: AaConfig, n_states: usize, n_actions: usize, timing: TimingModel) -> Result<Self> {
        config.validate()?;
        let register = ActionRegister::uniform(n_actions)?;
        Ok(Self {
            config,
            timing,
            registers: vec![register; n_states],
            values: vec![0.0; n_states],
        })
    }

    pub fn config(&self) -> &AaConfig {
        &self.config
    }

    pub fn register(&self, state: usize) -> &ActionRegister {
        &self.registers[state]
    }

    pub fn register_mut(&mut self, state: usize) -> &mut ActionRegister {
        &mut self.registers[state]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Qubits of one register; only one is live at a time.
    pub fn qubit_count(&self) -> usize {
        self.registers.first().map_or(0, |r| r.n_qubits())
    }

    /// Measures the state's register once (one circuit execution).
    pub fn select_action<R: Rng + ?Sized>(&self, state: usize, rng: &mut R, ledger: &CostLedger) -> Result<usize> {
        let reg = self.registers.get(state).ok_or_else(|| {
            Error::Argument(format!("state {state} out of range for {} registers", self.registers.len()))
        })?;
        let (one, two) = reg.gate_counts();
        ledger.record_executions(1, self.timing.execution_time(one, two));
        Ok(reg.sample(rng))
    }

    /// Amplifies the taken action, then updates `V`. Returns the number of
    /// Grover iterations applied.
    pub fn observe(&mut self, t: &Transition) -> Result<u64> {
        let v_next = if t.terminal { 0.0 } else { self.values[t.next_state] };
        let mut l = compute_l(self.config.k, t.reward, v_next);
        let reg = &mut self.registers[t.state];
        if self.config.overshoot_cap {
            l = reg.capped_iterations(t.action, l)?;
        }
        reg.grover_update(t.action, l)?;
        td0_update(&mut self.values, t, self.config.alpha, self.config.gamma);
        Ok(l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn tr(state: usize, action: usize, reward: f64, next_state: usize, terminal: bool) -> Transition {
        Transition {
            state,
            action,
            reward,
            next_state,
            done: terminal,
            terminal,
        }
    }

    #[test]
    fn closed_form_from_uniform() {
        for l in 0..=6u64 {
            let mut r = ActionRegister::uniform(4).unwrap();
            r.grover_update(2, l).unwrap();
            let expected = ((2 * l + 1) as f64 * PI / 6.0).sin().powi(2);
            assert!((r.probability(2) - expected).abs() < 1e-9, "L = {l}");
            assert!((r.statevector().norm_sqr() - 1.0).abs() < 1e-10);
        }
        let mut r = ActionRegister::uniform(4).unwrap();
        r.grover_update(1, 1).unwrap();
        assert!((r.probability(1) - 1.0).abs() < 1e-12);
        let mut r = ActionRegister::uniform(4).unwrap();
        r.grover_update(1, 3).unwrap();
        assert!((r.probability(1) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn zero_iterations_leave_register_alone() {
        let mut r = ActionRegister::uniform(4).unwrap();
        let before = r.clone();
        r.grover_update(0, 0).unwrap();
        assert_eq!(r, before);
        assert!(r.grover_update(4, 1).is_err());
    }

    #[test]
    fn compute_l_examples() {
        assert_eq!(compute_l(1.0, 0.5, 1.2), 1);
        assert_eq!(compute_l(1.0, -0.5, 0.2), 0);
        assert_eq!(compute_l(0.0, 5.0, 5.0), 0);
        assert_eq!(compute_l(0.6, 1.0, 0.0), 0);
        assert_eq!(compute_l(2.0, f64::NAN, 0.0), 0);
    }

    #[test]
    fn td0_examples() {
        let mut v = vec![0.0, 0.0];
        td0_update(&mut v, &tr(0, 0, 1.0, 1, false), 0.5, 0.9);
        assert_eq!(v[0], 0.5);
        let mut v = vec![0.3, 0.7];
        td0_update(&mut v, &tr(0, 0, 1.0, 1, false), 0.0, 0.9);
        assert_eq!(v, vec![0.3, 0.7]);
        // fixed point: 0.1 + 0.5 * 0.8 = 0.5
        let mut v = vec![0.5, 0.8];
        td0_update(&mut v, &tr(0, 0, 0.1, 1, false), 0.3, 0.5);
        assert!((v[0] - 0.5).abs() < 1e-15);
        let mut v = vec![0.0, 9.0];
        td0_update(&mut v, &tr(0, 0, 1.0, 1, true), 1.0, 0.9);
        assert_eq!(v[0], 1.0);
    }

    #[test]
    fn uniform_register_samples_uniformly() {
        let agent = AaAgent::new(AaConfig::default(), 1, 4, TimingModel::default()).unwrap();
        let ledger = CostLedger::new();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut counts = [0usize; 4];
        for _ in 0..10_000 {
            counts[agent.select_action(0, &mut rng, &ledger).unwrap()] += 1;
        }
        // binomial(1e4, 1/4): sd ~ 43.3
        for c in counts {
            assert!((c as f64 - 2500.0).abs() < 4.0 * 43.3, "{counts:?}");
        }
        assert_eq!(ledger.snapshot().circuit_executions, 10_000);
    }

    #[test]
    fn amplified_register_is_deterministic() {
        let mut agent = AaAgent::new(AaConfig::default(), 1, 4, TimingModel::default()).unwrap();
        agent.register_mut(0).grover_update(2, 1).unwrap();
        let ledger = CostLedger::new();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..1000).all(|_| agent.select_action(0, &mut rng, &ledger).unwrap() == 2));
    }

    #[test]
    fn seeded_selection_repeats() {
        let agent = AaAgent::new(AaConfig::default(), 2, 4, TimingModel::default()).unwrap();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ledger = CostLedger::new();
            (0..50).map(|i| agent.select_action(i % 2, &mut rng, &ledger).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(run(3), run(3));
    }

    #[test]
    fn selection_cost_tracks_iterations() {
        let timing = TimingModel::default();
        let mut agent = AaAgent::new(AaConfig::default(), 1, 4, timing).unwrap();
        let ledger = CostLedger::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        agent.select_action(0, &mut rng, &ledger).unwrap();
        // two Hadamards and the measurement: 1000 * (2 * 30 + 300) ns
        assert_eq!(ledger.snapshot().clock_ns, 360_000);
        agent.register_mut(0).grover_update(1, 1).unwrap();
        agent.select_action(0, &mut rng, &ledger).unwrap();
        // plus 8 one-qubit and 1 two-qubit gate: 1000 * (10 * 30 + 300 + 300)
        assert_eq!(ledger.snapshot().clock_ns, 360_000 + 900_000);
    }

    #[test]
    fn overshoot_cap_stops_at_peak() {
        let r = ActionRegister::uniform(4).unwrap();
        assert_eq!(r.capped_iterations(0, 5).unwrap(), 1);
        let mut agent = AaAgent::new(AaConfig { k: 10.0, ..AaConfig::default() }, 2, 4, TimingModel::default()).unwrap();
        let l = agent.observe(&tr(0, 3, 1.0, 1, true)).unwrap();
        assert_eq!(l, 1);
        assert!((agent.register(0).probability(3) - 1.0).abs() < 1e-12);
        let uncapped = AaConfig {
            k: 3.0,
            overshoot_cap: false,
            ..AaConfig::default()
        };
        let mut agent = AaAgent::new(uncapped, 2, 4, TimingModel::default()).unwrap();
        assert_eq!(agent.observe(&tr(0, 3, 1.0, 1, true)).unwrap(), 3);
        assert!((agent.register(0).probability(3) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn zero_gain_is_random_policy_with_td() {
        let mut agent = AaAgent::new(AaConfig { k: 0.0, ..AaConfig::default() }, 2, 4, TimingModel::default()).unwrap();
        for _ in 0..10 {
            assert_eq!(agent.observe(&tr(0, 1, 1.0, 1, true)).unwrap(), 0);
        }
        assert_eq!(agent.register(0).probabilities(), vec![0.25; 4]);
        assert!(agent.values()[0] > 0.6);
    }

    #[test]
    fn non_power_of_two_actions() {
        let mut r = ActionRegister::uniform(3).unwrap();
        assert_eq!(r.n_qubits(), 2);
        r.grover_update(0, 1).unwrap();
        let p = r.probabilities();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(r.probability(3), 0.0);
        let single = ActionRegister::uniform(1).unwrap();
        assert_eq!(single.n_qubits(), 0);
        assert_eq!(single.probabilities(), vec![1.0]);
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn norm_and_closed_form(marked in 0usize..4, l in 0u64..40) {
            let mut r = ActionRegister::uniform(4).unwrap();
            r.grover_update(marked, l).unwrap();
            prop_assert!((r.statevector().norm_sqr() - 1.0).abs() < 1e-10);
            let expected = ((2 * l + 1) as f64 * std::f64::consts::PI / 6.0).sin().powi(2);
            prop_assert!((r.probability(marked) - expected).abs() < 1e-9);
        }

        #[test]
        fn probabilities_sum_to_one(ops in proptest::collection::vec((0usize..4, 0u64..4), 0..20)) {
            let mut r = ActionRegister::uniform(4).unwrap();
            for (a, l) in ops {
                r.grover_update(a, l).unwrap();
                prop_assert!((r.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-10);
            }
        }
    }
}
