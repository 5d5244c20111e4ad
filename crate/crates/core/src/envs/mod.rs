//! Deterministic discrete MDPs used as benchmarks.
//!
//! Actions are `0: up, 1: down, 2: left, 3: right` for gridworlds. The chain
//! environment has a single "advance" action and exists for small, fully
//! checkable free-energy experiments.

mod chain;
mod gridworld;

pub use chain::ChainEnv;
pub use gridworld::{builtin_layout, Cell, GridworldEnv, GridworldSpec, BUILTIN_LAYOUTS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const UP: usize = 0;
pub const DOWN: usize = 1;
pub const LEFT: usize = 2;
pub const RIGHT: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: usize,
    pub action: usize,
    pub reward: f64,
    pub next_state: usize,
    /// Episode over (absorbing state reached or step limit hit).
    pub done: bool,
    /// `next_state` is absorbing; value bootstraps must stop here. A step-limit
    /// cut sets `done` without `terminal`.
    pub terminal: bool,
}

/// Result of one deterministic move in the underlying MDP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub next_state: usize,
    pub reward: f64,
    pub terminal: bool,
}

pub trait Environment: Send {
    fn n_states(&self) -> usize;
    fn n_actions(&self) -> usize;
    fn start_state(&self) -> usize;
    fn max_episode_steps(&self) -> usize;
    /// Pure transition function; no episode bookkeeping.
    fn dynamics(&self, state: usize, action: usize) -> Outcome;
    /// True if `state` can never be occupied (walls).
    fn is_blocked(&self, _state: usize) -> bool {
        false
    }

    fn reset(&mut self) -> usize;
    fn step(&mut self, action: usize) -> Result<Transition>;
}

/// Episode bookkeeping shared by the concrete environments.
#[derive(Debug, Clone, Default)]
pub(crate) struct EpisodeState {
    pub state: usize,
    pub steps: usize,
    pub done: bool,
}

impl EpisodeState {
    pub fn advance(&mut self, env_action: usize, outcome: Outcome, limit: usize) -> Transition {
        let from = self.state;
        self.steps += 1;
        self.state = outcome.next_state;
        self.done = outcome.terminal || self.steps >= limit;
        Transition {
            state: from,
            action: env_action,
            reward: outcome.reward,
            next_state: outcome.next_state,
            done: self.done,
            terminal: outcome.terminal,
        }
    }
}

pub(crate) fn check_action(action: usize, n_actions: usize) -> Result<()> {
    if action >= n_actions {
        return Err(Error::Argument(format!(
            "action {action} out of range for {n_actions} actions"
        )));
    }
    Ok(())
}

/// Optimal undiscounted return of one episode from the start state.
///
/// Runs finite-horizon value iteration over `max_episode_steps` with discount
/// `gamma` (ties broken towards the lowest action), then rolls the resulting
/// time-dependent greedy policy out and sums the raw rewards. With
/// `gamma = 1` this is the exact optimum under the step limit.
pub fn optimal_return(env: &dyn Environment, gamma: f64) -> Result<f64> {
    let policy = optimal_policy(env, gamma)?;
    let horizon = env.max_episode_steps();
    let mut s = env.start_state();
    let mut total = 0.0;
    for t in 0..horizon {
        let o = env.dynamics(s, policy[t][s]);
        total += o.reward;
        if o.terminal {
            break;
        }
        s = o.next_state;
    }
    Ok(total)
}

/// `policy[t][s]` is the optimal action with `t` steps already taken.
pub fn optimal_policy(env: &dyn Environment, gamma: f64) -> Result<Vec<Vec<usize>>> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Argument(format!("discount {gamma} outside [0, 1]")));
    }
    let (n_s, n_a, horizon) = (env.n_states(), env.n_actions(), env.max_episode_steps());
    let mut next_value = vec![0.0; n_s];
    let mut policy = vec![vec![0usize; n_s]; horizon];
    for t in (0..horizon).rev() {
        let mut value = vec![0.0; n_s];
        for s in 0..n_s {
            if env.is_blocked(s) {
                continue;
            }
            let mut best = f64::NEG_INFINITY;
            for a in 0..n_a {
                let o = env.dynamics(s, a);
                let q = o.reward
                    + if o.terminal {
                        0.0
                    } else {
                        gamma * next_value[o.next_state]
                    };
                if q > best {
                    best = q;
                    policy[t][s] = a;
                }
            }
            if !best.is_finite() {
                return Err(Error::Numerical(format!("non-finite value at state {s}")));
            }
            value[s] = best;
        }
        next_value = value;
    }
    Ok(policy)
}
