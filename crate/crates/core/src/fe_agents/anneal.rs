use rand::Rng;
use serde::{Deserialize, Serialize};

use super::replica::ReplicaIsing;
use crate::error::{Error, Result};
use crate::qsim::{CostLedger, TimingModel};

/// Metropolis annealing schedule: `reads` independent runs, each of `sweeps`
/// full passes over the spins while beta ramps linearly from `beta_start` to
/// `beta_end` (the last sweep runs at `beta_end`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SaSchedule {
    pub sweeps: usize,
    pub reads: usize,
    pub beta_start: f64,
    pub beta_end: f64,
}

impl Default for SaSchedule {
    fn default() -> Self {
        Self {
            sweeps: 50,
            reads: 1000,
            beta_start: 0.1,
            beta_end: 2.0,
        }
    }
}

impl SaSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.reads == 0 || self.sweeps == 0 {
            return Err(Error::Config("annealing needs at least one read and one sweep".into()));
        }
        if !(self.beta_start > 0.0 && self.beta_end >= self.beta_start && self.beta_end.is_finite()) {
            return Err(Error::Config(format!(
                "annealing ramp needs 0 < beta_start <= beta_end, got {} -> {}",
                self.beta_start, self.beta_end
            )));
        }
        Ok(())
    }

    pub fn beta_at(&self, sweep: usize) -> f64 {
        if self.sweeps <= 1 {
            return self.beta_end;
        }
        let t = sweep as f64 / (self.sweeps - 1) as f64;
        self.beta_start + (self.beta_end - self.beta_start) * t
    }
}

/// Spin configurations stored read by read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinSamples {
    n_spins: usize,
    data: Vec<i8>,
}

impl SpinSamples {
    pub fn new(n_spins: usize) -> Self {
        Self {
            n_spins,
            data: Vec::new(),
        }
    }

    pub fn push(&mut self, spins: &[i8]) {
        assert_eq!(spins.len(), self.n_spins, "spin count mismatch");
        self.data.extend_from_slice(spins);
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn len(&self) -> usize {
        if self.n_spins == 0 {
            0
        } else {
            self.data.len() / self.n_spins
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, read: usize) -> &[i8] {
        &self.data[read * self.n_spins..(read + 1) * self.n_spins]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[i8]> {
        self.data.chunks_exact(self.n_spins.max(1))
    }
}

/// Compressed adjacency of an Ising model for local-field updates.
struct Adjacency {
    offsets: Vec<usize>,
    neighbours: Vec<(u32, f64)>,
}

impl Adjacency {
    fn new(n: usize, couplings: &[(usize, usize, f64)]) -> Self {
        let mut lists: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for &(a, b, j) in couplings {
            if j == 0.0 {
                continue;
            }
            lists[a].push((b as u32, j));
            lists[b].push((a as u32, j));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbours = Vec::new();
        offsets.push(0);
        for l in lists {
            neighbours.extend(l);
            offsets.push(neighbours.len());
        }
        Self { offsets, neighbours }
    }
}

/// Samples the stacked Ising model by simulated annealing.
///
/// Energies follow `E = -sum_i h_i s_i - sum_(i,j) J_ij s_i s_j`, so a
/// positive field favours `s = +1`. Each call is one anneal job on the ledger.
pub fn sa_sample<R: Rng + ?Sized>(
    ising: &ReplicaIsing,
    schedule: &SaSchedule,
    timing: &TimingModel,
    rng: &mut R,
    ledger: &CostLedger,
) -> Result<SpinSamples> {
    schedule.validate()?;
    let n = ising.n_spins();
    let fields = ising.all_fields();
    let adj = Adjacency::new(n, &ising.all_couplings());
    let betas: Vec<f64> = (0..schedule.sweeps).map(|s| schedule.beta_at(s)).collect();

    let mut out = SpinSamples::new(n);
    out.data.reserve(n * schedule.reads);
    let mut spins = vec![0i8; n];
    for _ in 0..schedule.reads {
        for s in spins.iter_mut() {
            *s = if rng.gen::<bool>() { 1 } else { -1 };
        }
        for &beta in &betas {
            for i in 0..n {
                let mut local = fields[i];
                for &(j, w) in &adj.neighbours[adj.offsets[i]..adj.offsets[i + 1]] {
                    local += w * spins[j as usize] as f64;
                }
                let delta = 2.0 * spins[i] as f64 * local;
                if delta <= 0.0 || rng.gen::<f64>() < (-beta * delta).exp() {
                    spins[i] = -spins[i];
                }
            }
        }
        out.push(&spins);
    }
    ledger.record_anneal_job(timing.anneal_job_time());
    Ok(out)
}
