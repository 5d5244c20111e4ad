//! Exploration and learning-rate schedules shared by the value-based agents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear decay from `start` to `end` over the first `decay_fraction` of the
/// step budget, constant afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_fraction: f64,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self {
            start: 1.0,
            end: 0.05,
            decay_fraction: 0.5,
        }
    }
}

impl EpsilonSchedule {
    pub fn validate(&self) -> Result<()> {
        let ok = (0.0..=1.0).contains(&self.start)
            && (0.0..=1.0).contains(&self.end)
            && self.end <= self.start
            && (0.0..=1.0).contains(&self.decay_fraction);
        if !ok {
            return Err(Error::Config(format!("invalid epsilon schedule {self:?}")));
        }
        Ok(())
    }

    pub fn value(&self, step: usize, budget: usize) -> f64 {
        let horizon = self.decay_fraction * budget as f64;
        if horizon <= 0.0 {
            return self.end;
        }
        let frac = (step as f64 / horizon).min(1.0);
        self.start + (self.end - self.start) * frac
    }
}
