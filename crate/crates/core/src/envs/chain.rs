use super::{check_action, EpisodeState, Environment, Outcome, Transition};
use crate::error::{Error, Result};

/// Line of states with a single "advance" action. Advancing from the last
/// state pays `final_reward` and ends the episode; every other move pays 0.
#[derive(Debug, Clone)]
pub struct ChainEnv {
    n_states: usize,
    final_reward: f64,
    episode: EpisodeState,
}

impl ChainEnv {
    pub fn new(n_states: usize, final_reward: f64) -> Result<Self> {
        if n_states == 0 {
            return Err(Error::Config("chain needs at least one state".into()));
        }
        Ok(Self {
            n_states,
            final_reward,
            episode: EpisodeState::default(),
        })
    }

    /// Optimal action value of each state under discount `gamma`.
    pub fn optimal_q(&self, gamma: f64) -> Vec<f64> {
        (0..self.n_states)
            .map(|s| self.final_reward * gamma.powi((self.n_states - 1 - s) as i32))
            .collect()
    }
}

impl Environment for ChainEnv {
    fn n_states(&self) -> usize {
        self.n_states
    }

    fn n_actions(&self) -> usize {
        1
    }

    fn start_state(&self) -> usize {
        0
    }

    fn max_episode_steps(&self) -> usize {
        self.n_states
    }

    fn dynamics(&self, state: usize, _action: usize) -> Outcome {
        if state + 1 >= self.n_states {
            Outcome {
                next_state: state,
                reward: self.final_reward,
                terminal: true,
            }
        } else {
            Outcome {
                next_state: state + 1,
                reward: 0.0,
                terminal: false,
            }
        }
    }

    fn reset(&mut self) -> usize {
        self.episode = EpisodeState::default();
        0
    }

    fn step(&mut self, action: usize) -> Result<Transition> {
        if self.episode.done {
            return Err(Error::EpisodeFinished);
        }
        check_action(action, 1)?;
        let o = self.dynamics(self.episode.state, action);
        Ok(self.episode.advance(action, o, self.n_states))
    }
}
