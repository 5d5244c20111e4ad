//! Dense statevector simulation with cost accounting.
//!
//! Every call that stands for a run on hardware ([`run_circuit`],
//! [`run_circuit_shots`], each shifted evaluation inside
//! [`parameter_shift_grad`]) charges one circuit execution and its modeled
//! clock time to the caller's [`CostLedger`]. All observables are Pauli-Z
//! products, so they commute and are read from a single execution.

mod circuit;
mod cost;
mod statevector;

use std::f64::consts::FRAC_PI_2;

use rand::Rng;

pub use circuit::{Angle, Circuit, Gate, GateKind, PauliZ};
pub use cost::{estimate_circuit_time, CostLedger, LedgerSnapshot, TimingModel};
pub use statevector::{expectation_from_counts, Statevector, MAX_QUBITS};

use crate::error::{Error, Result};

/// Runs every gate of `circuit` on `|0...0>` and returns the final state.
/// No cost is charged; this is the simulator-internal primitive.
pub fn simulate(circuit: &Circuit, params: &[f64]) -> Result<Statevector> {
    let mut state = Statevector::zero(circuit.n_qubits())?;
    apply_gates(&mut state, circuit.gates(), params)?;
    Ok(state)
}

fn apply_gates(state: &mut Statevector, gates: &[Gate], params: &[f64]) -> Result<()> {
    for gate in gates {
        state.apply_gate(gate, gate.angle().resolve(params)?)?;
    }
    Ok(())
}

fn observe_all(state: &Statevector, circuit: &Circuit) -> Result<Vec<f64>> {
    circuit
        .observables()
        .iter()
        .map(|o| state.expectation(o))
        .collect()
}

/// Exact expectation of every observable from one execution.
pub fn run_circuit(
    circuit: &Circuit,
    params: &[f64],
    timing: &TimingModel,
    ledger: &CostLedger,
) -> Result<Vec<f64>> {
    let state = simulate(circuit, params)?;
    ledger.record_executions(1, estimate_circuit_time(circuit, timing));
    observe_all(&state, circuit)
}

/// Like [`run_circuit`] but estimates the observables from `timing.shots`
/// sampled measurements.
pub fn run_circuit_shots<R: Rng + ?Sized>(
    circuit: &Circuit,
    params: &[f64],
    timing: &TimingModel,
    rng: &mut R,
    ledger: &CostLedger,
) -> Result<Vec<f64>> {
    let state = simulate(circuit, params)?;
    ledger.record_executions(1, estimate_circuit_time(circuit, timing));
    let counts = state.sample_measurements(timing.shots as usize, rng)?;
    Ok(circuit
        .observables()
        .iter()
        .map(|o| expectation_from_counts(&counts, o))
        .collect())
}

/// Gradient of `sum_o loss_weights[o] * <O_o>` with respect to each circuit
/// parameter, by the two-term shift rule with shift pi/2.
///
/// Each parameterized gate costs exactly two executions. A parameter bound to
/// several gates accumulates `scale * (f(+) - f(-)) / 2` over all of them.
/// The returned vector has length `params.len()`.
pub fn parameter_shift_grad(
    circuit: &Circuit,
    params: &[f64],
    loss_weights: &[f64],
    timing: &TimingModel,
    ledger: &CostLedger,
) -> Result<Vec<f64>> {
    if loss_weights.len() != circuit.observables().len() {
        return Err(Error::Argument(format!(
            "{} loss weights for {} observables",
            loss_weights.len(),
            circuit.observables().len()
        )));
    }
    let gates = circuit.gates();
    for g in gates {
        if let Angle::Param { id, .. } = g.angle() {
            if !g.kind().is_rotation() {
                return Err(Error::UnsupportedGradient(format!(
                    "parameter {id} drives a {:?} gate; only RX/RY/RZ angles can be shifted",
                    g.kind()
                )));
            }
            if id >= params.len() {
                return Err(Error::Config(format!("circuit parameter {id} is unbound")));
            }
        }
    }

    let weighted = |state: &Statevector| -> Result<f64> {
        let mut acc = 0.0;
        for (o, w) in circuit.observables().iter().zip(loss_weights) {
            if *w != 0.0 {
                acc += w * state.expectation(o)?;
            }
        }
        Ok(acc)
    };

    // States just before each parameterized gate, so a shifted execution only
    // re-simulates the suffix of the circuit.
    let mut prefixes: Vec<(usize, Statevector)> = Vec::new();
    let mut state = Statevector::zero(circuit.n_qubits())?;
    for (i, g) in gates.iter().enumerate() {
        if matches!(g.angle(), Angle::Param { .. }) {
            prefixes.push((i, state.clone()));
        }
        state.apply_gate(g, g.angle().resolve(params)?)?;
    }

    let mut grad = vec![0.0; params.len()];
    for (i, prefix) in &prefixes {
        let Angle::Param { id, scale } = gates[*i].angle() else {
            unreachable!()
        };
        let angle = params[id] * scale;
        let mut shifted = [0.0; 2];
        for (slot, shift) in [FRAC_PI_2, -FRAC_PI_2].into_iter().enumerate() {
            let mut s = prefix.clone();
            s.apply_gate(&gates[*i], angle + shift)?;
            apply_gates(&mut s, &gates[i + 1..], params)?;
            shifted[slot] = weighted(&s)?;
        }
        grad[id] += scale * (shifted[0] - shifted[1]) / 2.0;
    }
    ledger.record_executions(
        2 * prefixes.len() as u64,
        estimate_circuit_time(circuit, timing),
    );
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;
    use std::time::Duration;

    fn single_ry(theta_id: usize) -> Circuit {
        let mut c = Circuit::new(1);
        c.push(Gate::rotation(
            GateKind::Ry,
            0,
            Angle::Param {
                id: theta_id,
                scale: 1.0,
            },
        ))
        .unwrap();
        c.add_observable(PauliZ::single(0)).unwrap();
        c
    }

    #[test]
    fn ry_pi_gives_minus_one() {
        let ledger = CostLedger::new();
        let out = run_circuit(&single_ry(0), &[PI], &TimingModel::default(), &ledger).unwrap();
        assert!((out[0] + 1.0).abs() < 1e-12);
        assert_eq!(ledger.circuit_executions(), 1);
        // 1 RY + measurement per shot
        assert_eq!(ledger.clock_time(), Duration::from_nanos(1000 * 330));
    }

    #[test]
    fn zero_angles_read_all_plus_one() {
        let mut c = Circuit::new(3);
        for q in 0..3 {
            c.push(Gate::rotation(GateKind::Rx, q, Angle::Param { id: q, scale: 0.7 }))
                .unwrap();
            c.push(Gate::rotation(GateKind::Ry, q, Angle::Param { id: 3 + q, scale: 1.0 }))
                .unwrap();
            c.add_observable(PauliZ::single(q)).unwrap();
        }
        c.push(Gate::cz(0, 1)).unwrap();
        let out = run_circuit(&c, &[0.0; 6], &TimingModel::default(), &CostLedger::new()).unwrap();
        for v in out {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unbound_parameter_fails() {
        let err = run_circuit(&single_ry(2), &[0.0], &TimingModel::default(), &CostLedger::new());
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn shift_rule_on_single_ry() {
        let t = TimingModel::default();
        let ledger = CostLedger::new();
        let g = parameter_shift_grad(&single_ry(0), &[0.0], &[1.0], &t, &ledger).unwrap();
        assert!(g[0].abs() < 1e-12);
        let g = parameter_shift_grad(&single_ry(0), &[FRAC_PI_2], &[1.0], &t, &ledger).unwrap();
        assert!((g[0] + 1.0).abs() < 1e-12);
        assert_eq!(ledger.circuit_executions(), 4);
    }

    #[test]
    fn parameter_on_entangler_is_unsupported() {
        let mut c = Circuit::new(2);
        c.push(Gate::new(GateKind::Cz, vec![0, 1], Angle::Param { id: 0, scale: 1.0 }).unwrap())
            .unwrap();
        c.add_observable(PauliZ::single(0)).unwrap();
        let r = parameter_shift_grad(&c, &[0.1], &[1.0], &TimingModel::default(), &CostLedger::new());
        assert!(matches!(r, Err(Error::UnsupportedGradient(_))));
    }

    #[test]
    fn shot_estimate_of_balanced_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = TimingModel::default();
        let c = single_ry(0);
        // P(|v| > 0.1) for 1000 shots of a fair +-1 variable is ~0.0016; check
        // all of 20 seeded trials stay inside.
        for _ in 0..20 {
            let v = run_circuit_shots(&c, &[FRAC_PI_2], &t, &mut rng, &CostLedger::new()).unwrap();
            assert!(v[0].abs() < 0.1, "{v:?}");
        }
    }

    fn random_circuit(n: usize, n_gates: usize, seed: u64) -> (Circuit, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = Circuit::new(n);
        let mut n_params = 0;
        for _ in 0..n_gates {
            let pick = rng.gen_range(0..5);
            if n >= 2 && pick >= 3 {
                let a = rng.gen_range(0..n);
                let mut b = rng.gen_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                c.push(if pick == 3 { Gate::cz(a, b) } else { Gate::cnot(a, b) })
                    .unwrap();
            } else {
                let kind = [GateKind::Rx, GateKind::Ry, GateKind::Rz][pick % 3];
                let q = rng.gen_range(0..n);
                let scale = rng.gen_range(-1.5..1.5);
                c.push(Gate::rotation(kind, q, Angle::Param { id: n_params, scale }))
                    .unwrap();
                n_params += 1;
            }
        }
        for q in 0..n {
            c.add_observable(PauliZ::single(q)).unwrap();
        }
        if n >= 2 {
            c.add_observable(PauliZ::new(vec![0, n - 1]).unwrap()).unwrap();
        }
        let params = (0..n_params).map(|_| rng.gen_range(-PI..PI)).collect();
        (c, params)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn norm_is_preserved(n in 1usize..=6, n_gates in 0usize..=40, seed in any::<u64>()) {
            let (c, p) = random_circuit(n, n_gates, seed);
            let s = simulate(&c, &p).unwrap();
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
            for o in c.observables() {
                let e = s.expectation(o).unwrap();
                prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&e));
            }
        }

        #[test]
        fn shift_rule_matches_finite_differences(n in 1usize..=4, n_gates in 1usize..=20, seed in any::<u64>()) {
            let (c, p) = random_circuit(n, n_gates, seed);
            let mut wrng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
            let w: Vec<f64> = (0..c.observables().len()).map(|_| wrng.gen_range(-1.0..1.0)).collect();
            let f = |x: &[f64]| -> f64 {
                let s = simulate(&c, x).unwrap();
                c.observables().iter().zip(&w).map(|(o, wi)| wi * s.expectation(o).unwrap()).sum()
            };
            let ledger = CostLedger::new();
            let g = parameter_shift_grad(&c, &p, &w, &TimingModel::default(), &ledger).unwrap();
            prop_assert_eq!(ledger.circuit_executions(), 2 * p.len() as u64);
            let h = 1e-4;
            for i in 0..p.len() {
                let mut up = p.clone();
                up[i] += h;
                let mut dn = p.clone();
                dn[i] -= h;
                let fd = (f(&up) - f(&dn)) / (2.0 * h);
                prop_assert!((fd - g[i]).abs() < 1e-4, "param {}: fd {} shift {}", i, fd, g[i]);
            }
        }
    }

    #[test]
    fn execution_accounting_is_exact() {
        let (c, p) = random_circuit(4, 30, 11);
        let t = TimingModel::default();
        let ledger = CostLedger::new();
        let (grads, forwards) = (3u64, 5u64);
        for _ in 0..grads {
            parameter_shift_grad(&c, &p, &vec![1.0; c.observables().len()], &t, &ledger).unwrap();
        }
        for _ in 0..forwards {
            run_circuit(&c, &p, &t, &ledger).unwrap();
        }
        let n_params = c.parameterized_gate_count() as u64;
        assert_eq!(ledger.circuit_executions(), 2 * n_params * grads + forwards);
        assert_eq!(
            ledger.clock_time(),
            estimate_circuit_time(&c, &t) * (2 * n_params * grads + forwards) as u32
        );
    }

    #[test]
    fn shots_converge_to_analytic() {
        let (c, p) = random_circuit(3, 15, 5);
        let exact = run_circuit(&c, &p, &TimingModel::default(), &CostLedger::new()).unwrap();
        let t = TimingModel {
            shots: 100_000,
            ..TimingModel::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let est = run_circuit_shots(&c, &p, &t, &mut rng, &CostLedger::new()).unwrap();
        for (a, b) in exact.iter().zip(&est) {
            assert!((a - b).abs() < 0.02, "{exact:?} vs {est:?}");
        }
    }
}
