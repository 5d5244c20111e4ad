//! Free-energy Q-learning with clamped Boltzmann machines.
//!
//! A state-action pair is clamped onto the visible units, the hidden units
//! form an Ising model (plus an optional transverse field), and `Q = -F`.
//! The transverse-field model is sampled through its replica-stacked
//! classical image with simulated annealing; exact enumeration and dense
//! diagonalization serve as oracles on small instances.

mod agent;
mod anneal;
mod free_energy;
mod model;
mod replica;

pub use agent::{
    exact_free_energy, fe_q_value, fe_td_update, Estimator, Evaluator, FeAgent, FeConfig,
};
pub use anneal::{sa_sample, SaSchedule, SpinSamples};
pub use free_energy::{
    estimate_free_energy, exact_classical, exact_quantum, FreeEnergyEstimate,
    MAX_DIAGONALIZATION_SPINS, MAX_ENUMERATION_SPINS,
};
pub use model::{ClampedIsing, QbmModel};
pub use replica::{replica_transform, w_plus, ReplicaIsing};
