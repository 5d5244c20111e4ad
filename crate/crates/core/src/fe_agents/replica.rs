use super::model::ClampedIsing;
use crate::error::{Error, Result};

/// Inter-replica coupling of the Suzuki-Trotter image of a transverse field
/// `gamma` at inverse temperature `beta` with `replicas` slices:
/// `(1 / 2 beta) ln coth(gamma beta / replicas)`.
pub fn w_plus(gamma: f64, beta: f64, replicas: usize) -> Result<f64> {
    if replicas == 0 {
        return Err(Error::Argument("replica count must be at least 1".into()));
    }
    if !(beta > 0.0) {
        return Err(Error::Argument(format!("beta {beta} must be positive")));
    }
    if gamma == 0.0 {
        return Err(Error::InfiniteCoupling);
    }
    if !(gamma > 0.0) {
        return Err(Error::Argument(format!("transverse field {gamma} must be positive")));
    }
    let x = gamma * beta / replicas as f64;
    let coth = 1.0 / x.tanh();
    Ok(coth.ln() / (2.0 * beta))
}

/// Classical Ising model stacked `replicas` deep.
///
/// Spin `(h, k)` lives at index `k * n_hidden + h`. Each slice carries the
/// clamped fields and couplings divided by `replicas`; spin `h` of slice `k`
/// couples to spin `h` of slice `k + 1 (mod replicas)` with strength `w_plus`.
/// With one replica the chain term is the constant `sigma^2 = 1` and is
/// dropped, which leaves the classical clamped model.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaIsing {
    pub n_hidden: usize,
    pub replicas: usize,
    pub fields: Vec<f64>,
    pub couplings: Vec<(usize, usize, f64)>,
    pub w_plus: f64,
}

pub fn replica_transform(clamped: &ClampedIsing, replicas: usize, gamma: f64, beta: f64) -> Result<ReplicaIsing> {
    if replicas == 0 {
        return Err(Error::Argument("replica count must be at least 1".into()));
    }
    let w_plus = if replicas == 1 {
        0.0
    } else {
        w_plus(gamma, beta, replicas)?
    };
    let r = replicas as f64;
    Ok(ReplicaIsing {
        n_hidden: clamped.n_spins(),
        replicas,
        fields: clamped.fields.iter().map(|f| f / r).collect(),
        couplings: clamped
            .couplings
            .iter()
            .map(|&(a, b, j)| (a, b, j / r))
            .collect(),
        w_plus,
    })
}

impl ReplicaIsing {
    pub fn n_spins(&self) -> usize {
        self.n_hidden * self.replicas
    }

    pub fn spin(&self, hidden: usize, replica: usize) -> usize {
        replica * self.n_hidden + hidden
    }

    /// Pairs of spins joined by the replica chain.
    pub fn chain_edges(&self) -> Vec<(usize, usize)> {
        if self.replicas < 2 {
            return Vec::new();
        }
        let mut edges = Vec::with_capacity(self.n_spins());
        for h in 0..self.n_hidden {
            for k in 0..self.replicas {
                edges.push((self.spin(h, k), self.spin(h, (k + 1) % self.replicas)));
            }
        }
        edges
    }

    /// Every coupling of the stacked model as `(i, j, J)` over spin indices.
    pub fn all_couplings(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for k in 0..self.replicas {
            for &(a, b, j) in &self.couplings {
                out.push((self.spin(a, k), self.spin(b, k), j));
            }
        }
        for (a, b) in self.chain_edges() {
            out.push((a, b, self.w_plus));
        }
        out
    }

    /// Per-spin fields of the stacked model.
    pub fn all_fields(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_spins());
        for _ in 0..self.replicas {
            out.extend_from_slice(&self.fields);
        }
        out
    }

    /// Energy of the slice terms (fields and intra-replica couplings).
    pub fn slice_energy(&self, spins: &[i8]) -> f64 {
        let mut e = 0.0;
        for k in 0..self.replicas {
            let slice = &spins[k * self.n_hidden..(k + 1) * self.n_hidden];
            for (f, &s) in self.fields.iter().zip(slice) {
                e -= f * s as f64;
            }
            for &(a, b, j) in &self.couplings {
                e -= j * (slice[a] * slice[b]) as f64;
            }
        }
        e
    }

    pub fn chain_energy(&self, spins: &[i8]) -> f64 {
        -self.w_plus
            * self
                .chain_edges()
                .iter()
                .map(|&(a, b)| (spins[a] * spins[b]) as f64)
                .sum::<f64>()
    }

    pub fn energy(&self, spins: &[i8], include_chain: bool) -> f64 {
        let e = self.slice_energy(spins);
        if include_chain {
            e + self.chain_energy(spins)
        } else {
            e
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn w_plus_reference_value() {
        let w = w_plus(0.506, 2.0, 5).unwrap();
        // (1/4) ln coth(0.2024)
        let expected = (1.0 / 0.2024f64.tanh()).ln() / 4.0;
        assert!((w - expected).abs() < 1e-15);
        assert!((w - 0.4027).abs() < 1e-3, "{w}");
    }

    #[test]
    fn w_plus_limits_and_errors() {
        assert!(matches!(w_plus(0.0, 2.0, 5), Err(Error::InfiniteCoupling)));
        assert!(w_plus(0.5, 2.0, 0).is_err());
        // coth(10) - 1 ~ 4.1e-9
        let far = w_plus(10.0, 1.0, 1).unwrap();
        assert!(far > 0.0 && (far - 2.0612e-9).abs() < 1e-12, "{far}");
        assert!(w_plus(20.0, 1.0, 1).unwrap() < far);
        // halving beta: prefactor doubles, argument halves
        let (g, b, r) = (0.506, 2.0, 5);
        let half = w_plus(g, b / 2.0, r).unwrap();
        let recomputed = (1.0 / (g * (b / 2.0) / r as f64).tanh()).ln() / b;
        assert!((half - recomputed).abs() < 1e-15);
    }

    fn clamped(n: usize) -> ClampedIsing {
        ClampedIsing {
            fields: (0..n).map(|i| 0.1 * (i as f64 + 1.0)).collect(),
            couplings: (0..n / 2).map(|i| (i, n / 2 + i, 0.5)).collect(),
        }
    }

    #[test]
    fn single_replica_is_the_clamped_model() {
        let c = clamped(4);
        let r = replica_transform(&c, 1, 0.0, 2.0).unwrap();
        assert_eq!(r.fields, c.fields);
        assert_eq!(r.couplings, c.couplings);
        assert!(r.chain_edges().is_empty());
        let spins = [1, -1, -1, 1];
        assert!((r.energy(&spins, true) - c.energy(&spins)).abs() < 1e-12);
    }

    #[test]
    fn five_replicas_of_eight_hidden() {
        let c = clamped(8);
        let r = replica_transform(&c, 5, 0.506, 2.0).unwrap();
        assert_eq!(r.n_spins(), 40);
        assert_eq!(r.couplings[0].2, 0.5 / 5.0);
        assert_eq!(r.chain_edges().len(), 8 * 5);
        assert_eq!(r.all_couplings().len(), 5 * c.couplings.len() + 40);
        assert!(matches!(replica_transform(&c, 5, 0.0, 2.0), Err(Error::InfiniteCoupling)));
    }

    #[test]
    fn aligned_replicas_reproduce_classical_energy() {
        let c = clamped(4);
        let r = replica_transform(&c, 3, 0.5, 2.0).unwrap();
        let one = [1i8, -1, 1, 1];
        let stacked: Vec<i8> = one.iter().cycle().take(12).cloned().collect();
        assert!((r.slice_energy(&stacked) - c.energy(&one)).abs() < 1e-12);
        assert!((r.chain_energy(&stacked) + r.w_plus * 12.0).abs() < 1e-12);
    }
}
