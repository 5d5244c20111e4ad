//! Execution counting and the modeled hardware clock.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::circuit::Circuit;
use crate::error::{Error, Result};

/// Gate and readout durations of the modeled device. All times are whole
/// nanoseconds so accumulated clock time stays exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingModel {
    pub t_1q_ns: u64,
    pub t_2q_ns: u64,
    pub t_meas_ns: u64,
    pub shots: u64,
    /// Charged once per annealer job (one free-energy evaluation).
    pub anneal_job_ns: u64,
}

impl Default for TimingModel {
    fn default() -> Self {
        Self {
            t_1q_ns: 30,
            t_2q_ns: 300,
            t_meas_ns: 300,
            shots: 1000,
            anneal_job_ns: 115_000_000,
        }
    }
}

impl TimingModel {
    pub fn validate(&self) -> Result<()> {
        if self.t_1q_ns == 0 || self.t_2q_ns == 0 || self.t_meas_ns == 0 || self.anneal_job_ns == 0 {
            return Err(Error::Config("timing durations must be positive".into()));
        }
        if self.shots == 0 {
            return Err(Error::Config("timing.shots must be at least 1".into()));
        }
        Ok(())
    }

    /// Serial gate-sum time of one execution with the given gate counts.
    pub fn execution_time(&self, one_qubit: u64, two_qubit: u64) -> Duration {
        let per_shot = one_qubit * self.t_1q_ns + two_qubit * self.t_2q_ns + self.t_meas_ns;
        Duration::from_nanos(self.shots * per_shot)
    }

    pub fn anneal_job_time(&self) -> Duration {
        Duration::from_nanos(self.anneal_job_ns)
    }
}

/// Modeled wall time of running `circuit` once at `timing.shots` shots:
/// `shots * (N_1q * t_1q + N_2q * t_2q + t_meas)`.
pub fn estimate_circuit_time(circuit: &Circuit, timing: &TimingModel) -> Duration {
    timing.execution_time(
        circuit.one_qubit_gate_count() as u64,
        circuit.two_qubit_gate_count() as u64,
    )
}

/// Thread-safe accumulator of quantum resource usage for one run.
#[derive(Debug, Default)]
pub struct CostLedger {
    circuit_executions: AtomicU64,
    clock_ns: AtomicU64,
    anneal_jobs: AtomicU64,
}

/// Point-in-time copy of a [`CostLedger`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerSnapshot {
    pub circuit_executions: u64,
    pub clock_ns: u64,
    pub anneal_jobs: u64,
}

impl LedgerSnapshot {
    pub fn clock_time(&self) -> Duration {
        Duration::from_nanos(self.clock_ns)
    }

    pub fn clock_time_s(&self) -> f64 {
        self.clock_ns as f64 * 1e-9
    }
}

impl CostLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_executions(&self, count: u64, each: Duration) {
        self.circuit_executions.fetch_add(count, Ordering::Relaxed);
        self.clock_ns
            .fetch_add(count * each.as_nanos() as u64, Ordering::Relaxed);
    }

    pub fn record_anneal_job(&self, duration: Duration) {
        self.anneal_jobs.fetch_add(1, Ordering::Relaxed);
        self.clock_ns
            .fetch_add(duration.as_nanos() as u64, Ordering::Relaxed);
    }

    pub fn circuit_executions(&self) -> u64 {
        self.circuit_executions.load(Ordering::Relaxed)
    }

    pub fn anneal_jobs(&self) -> u64 {
        self.anneal_jobs.load(Ordering::Relaxed)
    }

    pub fn clock_time(&self) -> Duration {
        Duration::from_nanos(self.clock_ns.load(Ordering::Relaxed))
    }

    pub fn snapshot(&self) -> LedgerSnapshot {
        LedgerSnapshot {
            circuit_executions: self.circuit_executions(),
            clock_ns: self.clock_ns.load(Ordering::Relaxed),
            anneal_jobs: self.anneal_jobs(),
        }
    }

    /// Adds another ledger's totals, e.g. from a worker that used its own ledger.
    pub fn merge(&self, other: &LedgerSnapshot) {
        self.circuit_executions
            .fetch_add(other.circuit_executions, Ordering::Relaxed);
        self.clock_ns.fetch_add(other.clock_ns, Ordering::Relaxed);
        self.anneal_jobs.fetch_add(other.anneal_jobs, Ordering::Relaxed);
    }
}
