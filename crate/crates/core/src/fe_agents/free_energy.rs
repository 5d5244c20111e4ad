use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::anneal::SpinSamples;
use super::model::ClampedIsing;
use super::replica::ReplicaIsing;
use crate::error::{Error, Result};

/// Largest hidden layer handled by classical enumeration.
pub const MAX_ENUMERATION_SPINS: usize = 12;
/// Largest hidden layer handled by dense diagonalization.
pub const MAX_DIAGONALIZATION_SPINS: usize = 10;

/// Free energy `F = <E> + (1/beta) sum_c P(c) ln P(c)` with the hidden-unit
/// statistics needed by the TD update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergyEstimate {
    pub free_energy: f64,
    pub mean_energy: f64,
    /// `(1/beta) sum P ln P`, never positive.
    pub entropy_term: f64,
    /// `<s_h>` per hidden unit.
    pub magnetizations: Vec<f64>,
    /// Row-major symmetric `<s_h s_h'>`, unit diagonal.
    pub correlations: Vec<f64>,
}

impl FreeEnergyEstimate {
    pub fn n_hidden(&self) -> usize {
        self.magnetizations.len()
    }

    pub fn correlation(&self, a: usize, b: usize) -> f64 {
        self.correlations[a * self.n_hidden() + b]
    }

    pub fn q_value(&self) -> f64 {
        -self.free_energy
    }
}

/// Accumulates weighted hidden-unit moments.
struct Moments {
    n: usize,
    mag: Vec<f64>,
    corr: Vec<f64>,
    weight: f64,
}

impl Moments {
    fn new(n: usize) -> Self {
        Self {
            n,
            mag: vec![0.0; n],
            corr: vec![0.0; n * n],
            weight: 0.0,
        }
    }

    fn add(&mut self, spins: &[i8], w: f64) {
        for a in 0..self.n {
            let sa = spins[a] as f64;
            self.mag[a] += w * sa;
            for b in a..self.n {
                self.corr[a * self.n + b] += w * sa * spins[b] as f64;
            }
        }
        self.weight += w;
    }

    fn finish(mut self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let norm = 1.0 / self.weight;
        for m in &mut self.mag {
            *m = (*m * norm).clamp(-1.0, 1.0);
        }
        for a in 0..n {
            for b in a..n {
                let v = (self.corr[a * n + b] * norm).clamp(-1.0, 1.0);
                self.corr[a * n + b] = v;
                self.corr[b * n + a] = v;
            }
        }
        (self.mag, self.corr)
    }
}

/// Plug-in estimate from annealing samples of the stacked model.
///
/// The energy of each read is its slice energy; the replica chain term is
/// added only when `include_chain` is set. Entropy is the empirical entropy
/// over distinct full configurations; moments average over reads and
/// replicas.
pub fn estimate_free_energy(
    samples: &SpinSamples,
    ising: &ReplicaIsing,
    beta: f64,
    include_chain: bool,
) -> Result<FreeEnergyEstimate> {
    if samples.is_empty() {
        return Err(Error::Argument("free-energy estimate needs at least one sample".into()));
    }
    if samples.n_spins() != ising.n_spins() {
        return Err(Error::Argument(format!(
            "samples have {} spins, model has {}",
            samples.n_spins(),
            ising.n_spins()
        )));
    }
    let n = ising.n_hidden;
    let mut counts: BTreeMap<&[i8], usize> = BTreeMap::new();
    let mut energy_sum = 0.0;
    let mut moments = Moments::new(n);
    for config in samples.iter() {
        *counts.entry(config).or_default() += 1;
        energy_sum += ising.energy(config, include_chain);
        for k in 0..ising.replicas {
            moments.add(&config[k * n..(k + 1) * n], 1.0);
        }
    }
    let total = samples.len() as f64;
    let plogp: f64 = counts
        .values()
        .map(|&c| {
            let p = c as f64 / total;
            p * p.ln()
        })
        .sum();
    let mean_energy = energy_sum / total;
    let entropy_term = plogp / beta;
    let (magnetizations, correlations) = moments.finish();
    Ok(FreeEnergyEstimate {
        free_energy: mean_energy + entropy_term,
        mean_energy,
        entropy_term,
        magnetizations,
        correlations,
    })
}

fn spins_of(index: usize, n: usize) -> Vec<i8> {
    (0..n).map(|h| if (index >> h) & 1 == 0 { 1 } else { -1 }).collect()
}

/// Builds the estimate from energy levels. `diagonal_weights` maps the level
/// probabilities to a probability per spin configuration for the moments.
fn from_spectrum(
    n: usize,
    beta: f64,
    energies: &[f64],
    diagonal_weights: impl Fn(&[f64]) -> Vec<f64>,
) -> FreeEnergyEstimate {
    let e_min = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let boltz: Vec<f64> = energies.iter().map(|e| (-beta * (e - e_min)).exp()).collect();
    let z: f64 = boltz.iter().sum();
    let free_energy = e_min - z.ln() / beta;
    let probs: Vec<f64> = boltz.iter().map(|b| b / z).collect();
    let mean_energy: f64 = probs.iter().zip(energies).map(|(p, e)| p * e).sum();
    let mut moments = Moments::new(n);
    for (index, w) in diagonal_weights(&probs).into_iter().enumerate() {
        if w > 0.0 {
            moments.add(&spins_of(index, n), w);
        }
    }
    let (magnetizations, correlations) = moments.finish();
    FreeEnergyEstimate {
        free_energy,
        mean_energy,
        entropy_term: (free_energy - mean_energy).min(0.0),
        magnetizations,
        correlations,
    }
}

/// Exact classical free energy by enumerating every hidden configuration.
pub fn exact_classical(ising: &ClampedIsing, beta: f64) -> Result<FreeEnergyEstimate> {
    let n = ising.n_spins();
    if n > MAX_ENUMERATION_SPINS {
        return Err(Error::SizeCap(format!(
            "{n} hidden units exceed the enumeration cap of {MAX_ENUMERATION_SPINS}"
        )));
    }
    let energies: Vec<f64> = (0..1usize << n)
        .map(|i| ising.energy(&spins_of(i, n)))
        .collect();
    Ok(from_spectrum(n, beta, &energies, |p| p.to_vec()))
}

/// Exact free energy of the clamped model with a transverse field `gamma`,
/// `H = -sum h_i Z_i - sum J_ij Z_i Z_j - gamma sum X_i`, by dense
/// diagonalization. Moments are the diagonal of the Gibbs density matrix.
pub fn exact_quantum(ising: &ClampedIsing, gamma: f64, beta: f64) -> Result<FreeEnergyEstimate> {
    let n = ising.n_spins();
    if n > MAX_DIAGONALIZATION_SPINS {
        return Err(Error::SizeCap(format!(
            "{n} hidden units exceed the diagonalization cap of {MAX_DIAGONALIZATION_SPINS}"
        )));
    }
    let dim = 1usize << n;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for x in 0..dim {
        h[(x, x)] = ising.energy(&spins_of(x, n));
        if gamma != 0.0 {
            for q in 0..n {
                h[(x, x ^ (1 << q))] = -gamma;
            }
        }
    }
    let eig = SymmetricEigen::new(h);
    let vectors = eig.eigenvectors;
    let energies: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    Ok(from_spectrum(n, beta, &energies, |p| {
        (0..dim)
            .map(|x| {
                (0..dim)
                    .filter(|&i| p[i] > 1e-300)
                    .map(|i| p[i] * vectors[(x, i)] * vectors[(x, i)])
                    .sum()
            })
            .collect()
    }))
}
