use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    Cz,
    Cnot,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz => 1,
            GateKind::Cz | GateKind::Cnot => 2,
        }
    }

    pub fn is_rotation(self) -> bool {
        self.arity() == 1
    }
}

/// Where a gate's rotation angle comes from.
///
/// `Param { id, scale }` resolves to `params[id] * scale`. The ansatz uses the
/// scale to fold a state feature into an input-scaling parameter, so the
/// parameter-shift rule knows which parameter each execution perturbs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    Fixed(f64),
    Param { id: usize, scale: f64 },
}

impl Angle {
    pub fn resolve(&self, params: &[f64]) -> Result<f64> {
        match *self {
            Angle::Fixed(a) => Ok(a),
            Angle::Param { id, scale } => params
                .get(id)
                .map(|p| p * scale)
                .ok_or_else(|| Error::Config(format!("circuit parameter {id} is unbound"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    kind: GateKind,
    targets: Vec<usize>,
    angle: Angle,
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>, angle: Angle) -> Result<Self> {
        if targets.len() != kind.arity() {
            return Err(Error::InvalidGate(format!(
                "{kind:?} takes {} target(s), got {}",
                kind.arity(),
                targets.len()
            )));
        }
        if kind.arity() == 2 && targets[0] == targets[1] {
            return Err(Error::InvalidGate(format!(
                "{kind:?} needs two distinct qubits, got {targets:?}"
            )));
        }
        Ok(Self {
            kind,
            targets,
            angle,
        })
    }

    // Infallible constructors used by tests and fixed-layout builders.
    pub fn rx(q: usize) -> Self {
        Self::rotation(GateKind::Rx, q, Angle::Fixed(0.0))
    }
    pub fn ry(q: usize) -> Self {
        Self::rotation(GateKind::Ry, q, Angle::Fixed(0.0))
    }
    pub fn rz(q: usize) -> Self {
        Self::rotation(GateKind::Rz, q, Angle::Fixed(0.0))
    }

    pub fn rotation(kind: GateKind, q: usize, angle: Angle) -> Self {
        assert!(kind.is_rotation(), "{kind:?} is not a rotation");
        Self {
            kind,
            targets: vec![q],
            angle,
        }
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Self::new(GateKind::Cz, vec![a, b], Angle::Fixed(0.0)).expect("distinct CZ qubits")
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::new(GateKind::Cnot, vec![control, target], Angle::Fixed(0.0))
            .expect("distinct CNOT qubits")
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn angle(&self) -> Angle {
        self.angle
    }
}

/// Tensor product of Pauli-Z on a set of qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliZ {
    qubits: Vec<usize>,
    mask: usize,
}

impl PauliZ {
    pub fn new(qubits: Vec<usize>) -> Result<Self> {
        let mut mask = 0usize;
        for &q in &qubits {
            if q >= usize::BITS as usize {
                return Err(Error::Argument(format!("qubit {q} out of range")));
            }
            if mask & (1 << q) != 0 {
                return Err(Error::Argument(format!("qubit {q} repeated in observable")));
            }
            mask |= 1 << q;
        }
        Ok(Self { qubits, mask })
    }

    pub fn single(q: usize) -> Self {
        Self {
            qubits: vec![q],
            mask: 1 << q,
        }
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn mask(&self) -> usize {
        self.mask
    }
}

/// Ordered gate list plus the observables read out after it.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    observables: Vec<PauliZ>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
            observables: Vec::new(),
        }
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        if let Some(&q) = gate.targets().iter().find(|&&q| q >= self.n_qubits) {
            return Err(Error::QubitIndex {
                index: q,
                n_qubits: self.n_qubits,
            });
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn add_observable(&mut self, observable: PauliZ) -> Result<()> {
        if let Some(&q) = observable.qubits().iter().find(|&&q| q >= self.n_qubits) {
            return Err(Error::QubitIndex {
                index: q,
                n_qubits: self.n_qubits,
            });
        }
        self.observables.push(observable);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn observables(&self) -> &[PauliZ] {
        &self.observables
    }

    pub fn one_qubit_gate_count(&self) -> usize {
        self.gates.iter().filter(|g| g.kind().arity() == 1).count()
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        self.gates.iter().filter(|g| g.kind().arity() == 2).count()
    }

    /// Number of gate slots bound to a trainable parameter.
    pub fn parameterized_gate_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g.angle(), Angle::Param { .. }))
            .count()
    }

    /// One past the largest parameter id referenced, or 0.
    pub fn param_span(&self) -> usize {
        self.gates
            .iter()
            .filter_map(|g| match g.angle() {
                Angle::Param { id, .. } => Some(id + 1),
                Angle::Fixed(_) => None,
            })
            .max()
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_arity_is_checked() {
        assert!(Gate::new(GateKind::Rx, vec![0, 1], Angle::Fixed(0.0)).is_err());
        assert!(Gate::new(GateKind::Cz, vec![0], Angle::Fixed(0.0)).is_err());
        assert!(Gate::new(GateKind::Cz, vec![1, 1], Angle::Fixed(0.0)).is_err());
        assert!(Gate::new(GateKind::Cnot, vec![0, 1], Angle::Fixed(0.0)).is_ok());
    }

    #[test]
    fn circuit_rejects_out_of_range_targets() {
        let mut c = Circuit::new(2);
        assert!(c.push(Gate::rx(1)).is_ok());
        assert!(c.push(Gate::cz(0, 2)).is_err());
        assert!(c.add_observable(PauliZ::single(2)).is_err());
        assert_eq!(c.gates().len(), 1);
    }

    #[test]
    fn unbound_parameter_is_a_config_error() {
        let a = Angle::Param { id: 3, scale: 1.0 };
        assert!(matches!(a.resolve(&[0.0; 3]), Err(Error::Config(_))));
        assert_eq!(a.resolve(&[0.0, 0.0, 0.0, 0.5]).unwrap(), 0.5);
    }
}
