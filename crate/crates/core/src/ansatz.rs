//! Hardware-efficient data re-uploading ansatz and state encodings.
//!
//! One layer is an encoding block (`RX(lambda * x)` per qubit), a variational
//! block (`RY(theta) RZ(theta)` per qubit) and, for [`Variant::Full`], a ring of
//! CZ gates. Two ablations drop the entanglers: [`Variant::NoEntanglement`]
//! keeps the encoding as is, [`Variant::NoEntanglementFullEncoding`] instead
//! uploads every feature onto every qubit.
//!
//! Circuit parameter ids are laid out as `[theta..., lambda...]`; see
//! [`ParamSet::circuit_params`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{Angle, Circuit, Gate, GateKind, PauliZ};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "full")]
    Full,
    /// Entangling block removed.
    #[serde(rename = "a")]
    NoEntanglement,
    /// Entangling block removed, whole state uploaded on every qubit.
    #[serde(rename = "b")]
    NoEntanglementFullEncoding,
}

impl Variant {
    pub const ALL: [Variant; 3] = [
        Variant::Full,
        Variant::NoEntanglement,
        Variant::NoEntanglementFullEncoding,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::NoEntanglement => "a",
            Variant::NoEntanglementFullEncoding => "b",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(Variant::Full),
            "a" | "no_entanglement" => Ok(Variant::NoEntanglement),
            "b" | "no_entanglement_full_encoding" => Ok(Variant::NoEntanglementFullEncoding),
            _ => Err(Error::Config(format!("unknown ansatz variant '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    OneHot,
    Binary,
}

impl Encoding {
    pub const ALL: [Encoding; 2] = [Encoding::Binary, Encoding::OneHot];

    pub fn as_str(self) -> &'static str {
        match self {
            Encoding::OneHot => "one_hot",
            Encoding::Binary => "binary",
        }
    }

    /// Length of the feature vector for `n_states` states.
    pub fn feature_dim(self, n_states: usize) -> usize {
        match self {
            Encoding::OneHot => n_states,
            Encoding::Binary => ceil_log2(n_states),
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Encoding {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "one_hot" | "onehot" => Ok(Encoding::OneHot),
            "binary" => Ok(Encoding::Binary),
            _ => Err(Error::Config(format!("unknown encoding '{s}'"))),
        }
    }
}

/// Smallest `b` with `2^b >= n`.
pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Feature vector of a discrete state, entries in `{-1, +1}`.
///
/// Binary features are most-significant bit first.
pub fn encode_state(encoding: Encoding, state_index: usize, n_states: usize) -> Result<Vec<f64>> {
    if state_index >= n_states {
        return Err(Error::Argument(format!(
            "state {state_index} out of range for {n_states} states"
        )));
    }
    let pm = |on: bool| if on { 1.0 } else { -1.0 };
    Ok(match encoding {
        Encoding::OneHot => (0..n_states).map(|i| pm(i == state_index)).collect(),
        Encoding::Binary => {
            let bits = ceil_log2(n_states);
            (0..bits)
                .map(|b| pm((state_index >> (bits - 1 - b)) & 1 == 1))
                .collect()
        }
    })
}

/// Qubits needed to encode `n_states` states and read out `n_actions` actions.
pub fn count_qubits(encoding: Encoding, n_states: usize, n_actions: usize) -> usize {
    encoding.feature_dim(n_states).max(n_actions)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub variant: Variant,
    pub encoding: Encoding,
    pub n_states: usize,
    pub n_actions: usize,
}

impl AnsatzSpec {
    /// Spec with the minimal qubit count for the encoding.
    pub fn for_problem(
        encoding: Encoding,
        variant: Variant,
        n_layers: usize,
        n_states: usize,
        n_actions: usize,
    ) -> Result<Self> {
        Self::new(
            count_qubits(encoding, n_states, n_actions),
            n_layers,
            variant,
            encoding,
            n_states,
            n_actions,
        )
    }

    pub fn new(
        n_qubits: usize,
        n_layers: usize,
        variant: Variant,
        encoding: Encoding,
        n_states: usize,
        n_actions: usize,
    ) -> Result<Self> {
        let spec = Self {
            n_qubits,
            n_layers,
            variant,
            encoding,
            n_states,
            n_actions,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_states < 2 {
            return Err(Error::Config("ansatz needs at least 2 states".into()));
        }
        if self.n_layers == 0 {
            return Err(Error::Config("ansatz needs at least one layer".into()));
        }
        if self.n_actions == 0 || self.n_qubits < self.n_actions {
            return Err(Error::Config(format!(
                "{} qubits cannot read out {} actions",
                self.n_qubits, self.n_actions
            )));
        }
        if self.variant != Variant::NoEntanglementFullEncoding && self.n_qubits < self.feature_dim() {
            return Err(Error::Config(format!(
                "variant {} needs at least {} qubits for {} features",
                self.variant,
                self.feature_dim(),
                self.feature_dim()
            )));
        }
        if self.n_qubits > crate::qsim::MAX_QUBITS {
            return Err(Error::Config(format!(
                "{} qubits exceeds the simulator cap of {}",
                self.n_qubits,
                crate::qsim::MAX_QUBITS
            )));
        }
        Ok(())
    }

    pub fn feature_dim(&self) -> usize {
        self.encoding.feature_dim(self.n_states)
    }

    pub fn n_theta(&self) -> usize {
        2 * self.n_layers * self.n_qubits
    }

    pub fn n_lambda(&self) -> usize {
        match self.variant {
            Variant::Full | Variant::NoEntanglement => self.n_layers * self.n_qubits,
            Variant::NoEntanglementFullEncoding => self.n_layers * self.n_qubits * self.feature_dim(),
        }
    }

    /// Parameters that live inside the circuit (theta and lambda).
    pub fn n_circuit_params(&self) -> usize {
        self.n_theta() + self.n_lambda()
    }

    fn theta_id(&self, layer: usize, qubit: usize, slot: usize) -> usize {
        (layer * self.n_qubits + qubit) * 2 + slot
    }

    fn lambda_id(&self, layer: usize, qubit: usize, feature: usize) -> usize {
        let local = match self.variant {
            Variant::Full | Variant::NoEntanglement => layer * self.n_qubits + qubit,
            Variant::NoEntanglementFullEncoding => {
                (layer * self.n_qubits + qubit) * self.feature_dim() + feature
            }
        };
        self.n_theta() + local
    }

    /// Qubit pairs of the entangling ring for one layer.
    fn ring(&self) -> Vec<(usize, usize)> {
        match self.n_qubits {
            0 | 1 => Vec::new(),
            // A two-element ring would apply CZ twice on one pair, which cancels.
            2 => vec![(0, 1)],
            n => (0..n).map(|q| (q, (q + 1) % n)).collect(),
        }
    }
}

/// Builds the circuit for one encoded state. Feature values are folded into
/// the encoding gates' parameter bindings.
pub fn build_circuit(spec: &AnsatzSpec, features: &[f64]) -> Result<Circuit> {
    let d = spec.feature_dim();
    if features.len() != d {
        return Err(Error::Config(format!(
            "expected {d} features for {} encoding of {} states, got {}",
            spec.encoding,
            spec.n_states,
            features.len()
        )));
    }
    let n = spec.n_qubits;
    let mut c = Circuit::new(n);
    let ring = spec.ring();
    for layer in 0..spec.n_layers {
        for q in 0..n {
            match spec.variant {
                Variant::Full | Variant::NoEntanglement => {
                    // Qubits beyond the feature dimension re-read features cyclically.
                    let f = q % d;
                    c.push(Gate::rotation(
                        GateKind::Rx,
                        q,
                        Angle::Param {
                            id: spec.lambda_id(layer, q, f),
                            scale: features[f],
                        },
                    ))?;
                }
                Variant::NoEntanglementFullEncoding => {
                    for (f, &x) in features.iter().enumerate() {
                        c.push(Gate::rotation(
                            GateKind::Rx,
                            q,
                            Angle::Param {
                                id: spec.lambda_id(layer, q, f),
                                scale: x,
                            },
                        ))?;
                    }
                }
            }
        }
        for q in 0..n {
            for (slot, kind) in [GateKind::Ry, GateKind::Rz].into_iter().enumerate() {
                c.push(Gate::rotation(
                    kind,
                    q,
                    Angle::Param {
                        id: spec.theta_id(layer, q, slot),
                        scale: 1.0,
                    },
                ))?;
            }
        }
        if spec.variant == Variant::Full {
            for &(a, b) in &ring {
                c.push(Gate::cz(a, b))?;
            }
        }
    }
    for a in 0..spec.n_actions {
        c.add_observable(PauliZ::single(a))?;
    }
    Ok(c)
}

/// Trainable parameters of an ansatz-based approximator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub theta: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Classical output scaling, one weight per action.
    pub w: Vec<f64>,
}

impl ParamSet {
    /// theta ~ U[-pi, pi], lambda = 1, w = 1.
    pub fn init<R: Rng + ?Sized>(spec: &AnsatzSpec, rng: &mut R) -> Self {
        Self {
            theta: (0..spec.n_theta()).map(|_| rng.gen_range(-PI..PI)).collect(),
            lambda: vec![1.0; spec.n_lambda()],
            w: vec![1.0; spec.n_actions],
        }
    }

    /// theta = 0, lambda = 1, w = 1.
    pub fn zero_theta(spec: &AnsatzSpec) -> Self {
        Self {
            theta: vec![0.0; spec.n_theta()],
            lambda: vec![1.0; spec.n_lambda()],
            w: vec![1.0; spec.n_actions],
        }
    }

    /// Flat vector indexed by the circuit's parameter ids.
    pub fn circuit_params(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.theta.len() + self.lambda.len());
        v.extend_from_slice(&self.theta);
        v.extend_from_slice(&self.lambda);
        v
    }

    /// `params += step * grad` over the circuit parameters.
    pub fn add_to_circuit_params(&mut self, grad: &[f64], step: f64) {
        let (gt, gl) = grad.split_at(self.theta.len());
        for (p, g) in self.theta.iter_mut().zip(gt) {
            *p += step * g;
        }
        for (p, g) in self.lambda.iter_mut().zip(gl) {
            *p += step * g;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn encodings() {
        assert_eq!(
            encode_state(Encoding::OneHot, 2, 9).unwrap(),
            vec![-1.0, -1.0, 1.0, -1.0, -1.0, -1.0, -1.0, -1.0, -1.0]
        );
        assert_eq!(
            encode_state(Encoding::Binary, 5, 16).unwrap(),
            vec![-1.0, 1.0, -1.0, 1.0]
        );
        assert_eq!(encode_state(Encoding::Binary, 0, 9).unwrap(), vec![-1.0; 4]);
        assert!(encode_state(Encoding::OneHot, 9, 9).is_err());
    }

    #[test]
    fn qubit_counts() {
        assert_eq!(count_qubits(Encoding::OneHot, 9, 4), 9);
        assert_eq!(count_qubits(Encoding::Binary, 9, 4), 4);
        assert_eq!(count_qubits(Encoding::Binary, 64, 4), 6);
        assert_eq!(count_qubits(Encoding::Binary, 2, 4), 4);
    }

    fn spec(variant: Variant) -> AnsatzSpec {
        AnsatzSpec::new(4, 5, variant, Encoding::Binary, 16, 4).unwrap()
    }

    #[test]
    fn gate_counts_per_variant() {
        let f = vec![1.0; 4];
        let full = build_circuit(&spec(Variant::Full), &f).unwrap();
        assert_eq!(full.one_qubit_gate_count(), 60);
        assert_eq!(full.two_qubit_gate_count(), 20);

        let a = build_circuit(&spec(Variant::NoEntanglement), &f).unwrap();
        assert_eq!(a.one_qubit_gate_count(), 60);
        assert_eq!(a.two_qubit_gate_count(), 0);

        let b = build_circuit(&spec(Variant::NoEntanglementFullEncoding), &f).unwrap();
        let rx = b.gates().iter().filter(|g| g.kind() == GateKind::Rx).count();
        assert_eq!(rx, 5 * 16);
        assert_eq!(b.two_qubit_gate_count(), 0);
    }

    #[test]
    fn parameter_counts_match_closed_forms() {
        for v in Variant::ALL {
            for (enc, n_states) in [(Encoding::Binary, 9), (Encoding::OneHot, 9), (Encoding::Binary, 64)] {
                let s = AnsatzSpec::for_problem(enc, v, 3, n_states, 4).unwrap();
                let d = s.feature_dim();
                let n = s.n_qubits;
                assert_eq!(s.n_theta(), 2 * 3 * n);
                let expected_lambda = match v {
                    Variant::NoEntanglementFullEncoding => 3 * n * d,
                    _ => 3 * n,
                };
                assert_eq!(s.n_lambda(), expected_lambda);
                let c = build_circuit(&s, &encode_state(enc, 1, n_states).unwrap()).unwrap();
                assert_eq!(c.param_span(), s.n_circuit_params());
                assert_eq!(c.parameterized_gate_count(), s.n_circuit_params());
                assert_eq!(c.observables().len(), 4);
                let p = ParamSet::init(&s, &mut ChaCha8Rng::seed_from_u64(0));
                assert_eq!(p.circuit_params().len(), s.n_circuit_params());
                assert_eq!(p.w.len(), 4);
            }
        }
    }

    #[test]
    fn ring_size_scales_with_qubits() {
        for n_states in [16, 32, 64, 128] {
            let s = AnsatzSpec::for_problem(Encoding::Binary, Variant::Full, 5, n_states, 4).unwrap();
            let c = build_circuit(&s, &vec![1.0; s.feature_dim()]).unwrap();
            assert_eq!(c.two_qubit_gate_count(), s.n_qubits * 5);
        }
    }

    #[test]
    fn rebuild_is_identical() {
        let s = spec(Variant::Full);
        let f = encode_state(Encoding::Binary, 7, 16).unwrap();
        assert_eq!(build_circuit(&s, &f).unwrap(), build_circuit(&s, &f).unwrap());
    }

    #[test]
    fn invalid_specs() {
        // one-hot of 9 states cannot fit 4 qubits for FULL/A ...
        assert!(AnsatzSpec::new(4, 5, Variant::Full, Encoding::OneHot, 9, 4).is_err());
        // ... but variant B uploads everything on each qubit.
        assert!(AnsatzSpec::new(4, 5, Variant::NoEntanglementFullEncoding, Encoding::OneHot, 9, 4).is_ok());
        assert!(AnsatzSpec::new(3, 5, Variant::Full, Encoding::Binary, 8, 4).is_err());
        let s = spec(Variant::Full);
        assert!(matches!(build_circuit(&s, &[1.0; 3]), Err(Error::Config(_))));
    }
}
