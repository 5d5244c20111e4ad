use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use super::circuit::{Gate, GateKind, PauliZ};
use crate::error::{Error, Result};

/// Largest register the dense simulator will allocate.
pub const MAX_QUBITS: usize = 14;

/// Dense state of an `n`-qubit register.
///
/// Qubit `q` is bit `q` of the basis-state index (little-endian), so basis
/// state `0b10` has qubit 1 set and qubit 0 clear.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// The all-zero computational basis state.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_size(n_qubits)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Equal superposition over all basis states.
    pub fn uniform(n_qubits: usize) -> Result<Self> {
        check_size(n_qubits)?;
        let dim = 1usize << n_qubits;
        let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(Self {
            n_qubits,
            amplitudes: vec![amp; dim],
        })
    }

    /// Wraps explicit amplitudes. The vector must have length `2^n` and unit norm.
    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_size(n_qubits)?;
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::Argument(format!(
                "expected {} amplitudes for {} qubits, got {}",
                1usize << n_qubits,
                n_qubits,
                amplitudes.len()
            )));
        }
        let state = Self {
            n_qubits,
            amplitudes,
        };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Argument(format!("state is not normalized (|psi|^2 = {norm})")));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn probability(&self, basis_state: usize) -> f64 {
        self.amplitudes[basis_state].norm_sqr()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::QubitIndex {
                index: q,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    /// Applies `gate` with rotation angle `angle`. The angle is ignored for
    /// CZ and CNOT.
    pub fn apply_gate(&mut self, gate: &Gate, angle: f64) -> Result<()> {
        for &t in gate.targets() {
            self.check_qubit(t)?;
        }
        if !angle.is_finite() {
            return Err(Error::Argument(format!("non-finite gate angle {angle}")));
        }
        let t = gate.targets();
        match gate.kind() {
            GateKind::Rx => self.rx(t[0], angle),
            GateKind::Ry => self.ry(t[0], angle),
            GateKind::Rz => self.rz(t[0], angle),
            GateKind::Cz => self.cz(t[0], t[1]),
            GateKind::Cnot => self.cnot(t[0], t[1]),
        }
        Ok(())
    }

    /// Applies the single-qubit matrix `[[m00, m01], [m10, m11]]` to qubit `q`.
    fn apply_1q(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let bit = 1usize << q;
        let dim = self.amplitudes.len();
        // Visit each (i, i | bit) pair once by stepping over blocks of 2*bit.
        let mut base = 0;
        while base < dim {
            for i in base..base + bit {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i | bit];
                self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amplitudes[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
            base += bit << 1;
        }
    }

    fn rx(&mut self, q: usize, angle: f64) {
        let (s, c) = (angle / 2.0).sin_cos();
        let c = Complex64::new(c, 0.0);
        let mis = Complex64::new(0.0, -s);
        self.apply_1q(q, [[c, mis], [mis, c]]);
    }

    fn ry(&mut self, q: usize, angle: f64) {
        let (s, c) = (angle / 2.0).sin_cos();
        let c = Complex64::new(c, 0.0);
        let s = Complex64::new(s, 0.0);
        self.apply_1q(q, [[c, -s], [s, c]]);
    }

    fn rz(&mut self, q: usize, angle: f64) {
        let bit = 1usize << q;
        let lo = Complex64::from_polar(1.0, -angle / 2.0);
        let hi = Complex64::from_polar(1.0, angle / 2.0);
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            *a *= if i & bit == 0 { lo } else { hi };
        }
    }

    fn cz(&mut self, a: usize, b: usize) {
        let mask = (1usize << a) | (1usize << b);
        for (i, amp) in self.amplitudes.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
    }

    fn cnot(&mut self, control: usize, target: usize) {
        let c = 1usize << control;
        let t = 1usize << target;
        for i in 0..self.amplitudes.len() {
            if i & c != 0 && i & t == 0 {
                self.amplitudes.swap(i, i | t);
            }
        }
    }

    /// Exact expectation value of a Pauli-Z product.
    pub fn expectation(&self, observable: &PauliZ) -> Result<f64> {
        for &q in observable.qubits() {
            self.check_qubit(q)?;
        }
        let mask = observable.mask();
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let p = a.norm_sqr();
                if (i & mask).count_ones() % 2 == 0 {
                    p
                } else {
                    -p
                }
            })
            .sum())
    }

    /// Draws `shots` computational-basis measurements without collapsing the
    /// state. Returns one count per basis state.
    pub fn sample_measurements<R: Rng + ?Sized>(&self, shots: usize, rng: &mut R) -> Result<Vec<u64>> {
        if shots == 0 {
            return Err(Error::Argument("shots must be at least 1".into()));
        }
        let dist = WeightedIndex::new(self.probabilities())
            .map_err(|e| Error::Numerical(format!("cannot sample from state: {e}")))?;
        let mut counts = vec![0u64; self.dim()];
        for _ in 0..shots {
            counts[dist.sample(rng)] += 1;
        }
        Ok(counts)
    }
}

fn check_size(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_QUBITS {
        return Err(Error::Argument(format!(
            "{n_qubits} qubits exceeds the simulator cap of {MAX_QUBITS}"
        )));
    }
    Ok(())
}

/// Estimates each observable from sampled counts.
pub fn expectation_from_counts(counts: &[u64], observable: &PauliZ) -> f64 {
    let mask = observable.mask();
    let total: u64 = counts.iter().sum();
    let signed: i64 = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| if (i & mask).count_ones() % 2 == 0 { c as i64 } else { -(c as i64) })
        .sum();
    signed as f64 / total as f64
}
