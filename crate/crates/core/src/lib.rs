//! Benchmarking suite for quantum reinforcement learning on gridworld MDPs.
//!
//! Three agent families share one set of environments and one cost model:
//!
//! * [`pqc_agents`]: policy-gradient and deep-Q agents whose function
//!   approximator is a data re-uploading variational circuit ([`ansatz`]),
//!   simulated exactly by [`qsim`].
//! * [`fe_agents`]: free-energy Q-learning with clamped deep Boltzmann
//!   machines, optionally quantum (transverse field) through replica stacking
//!   and simulated annealing.
//! * [`aa_agent`]: amplitude-amplification agent driving one small Grover
//!   register per state.
//!
//! Every quantum evaluation is charged to a [`qsim::CostLedger`] so agents can
//! be compared by circuit executions and modeled hardware clock time as well as
//! by environment steps. [`harness`] runs seeded experiments and ablation sweeps
//! and writes plot-ready CSV/JSON.

pub mod aa_agent;
pub mod ansatz;
pub mod envs;
pub mod error;
pub mod fe_agents;
pub mod harness;
pub mod pqc_agents;
pub mod qsim;
pub mod schedule;

pub use error::{Error, Result};
