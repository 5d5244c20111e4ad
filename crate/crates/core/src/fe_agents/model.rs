use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{encode_state, Encoding};
use crate::error::{Error, Result};

/// Clamped deep Boltzmann machine (transverse field optional).
///
/// Visible units are the encoded state followed by the one-hot action, all in
/// `{-1, +1}`. Hidden units are numbered layer by layer; only the first hidden
/// layer couples to the visible units and hidden couplings join successive
/// layers only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QbmModel {
    pub encoding: Encoding,
    pub n_states: usize,
    pub n_actions: usize,
    pub hidden_layers: Vec<usize>,
    /// Row-major `[visible][first-layer hidden]`.
    pub w_vh: Vec<f64>,
    pub hh_edges: Vec<(usize, usize)>,
    pub w_hh: Vec<f64>,
    /// Transverse field strength Gamma.
    pub transverse_field: f64,
    /// Inverse temperature beta.
    pub beta: f64,
}

impl QbmModel {
    /// Model with all weights zero.
    pub fn new(
        encoding: Encoding,
        n_states: usize,
        n_actions: usize,
        hidden_layers: Vec<usize>,
        transverse_field: f64,
        beta: f64,
    ) -> Result<Self> {
        if hidden_layers.is_empty() || hidden_layers.contains(&0) {
            return Err(Error::Config("hidden layers must be non-empty and non-zero".into()));
        }
        if !(transverse_field >= 0.0 && transverse_field.is_finite()) {
            return Err(Error::Config(format!("transverse field {transverse_field} must be >= 0")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Config(format!("beta {beta} must be > 0")));
        }
        if n_states < 2 && encoding == Encoding::Binary {
            return Err(Error::Config("binary encoding needs at least 2 states".into()));
        }
        if n_states == 0 || n_actions == 0 {
            return Err(Error::Config("model needs states and actions".into()));
        }
        let mut hh_edges = Vec::new();
        let mut offset = 0;
        for pair in hidden_layers.windows(2) {
            for i in 0..pair[0] {
                for j in 0..pair[1] {
                    hh_edges.push((offset + i, offset + pair[0] + j));
                }
            }
            offset += pair[0];
        }
        let n_visible = encoding.feature_dim(n_states).max(1) + n_actions;
        Ok(Self {
            encoding,
            n_states,
            n_actions,
            w_vh: vec![0.0; n_visible * hidden_layers[0]],
            w_hh: vec![0.0; hh_edges.len()],
            hh_edges,
            hidden_layers,
            transverse_field,
            beta,
        })
    }

    /// Draws every weight uniformly from `[-scale, scale]`.
    pub fn randomize<R: Rng + ?Sized>(&mut self, scale: f64, rng: &mut R) {
        if scale <= 0.0 {
            return;
        }
        for w in self.w_vh.iter_mut().chain(self.w_hh.iter_mut()) {
            *w = rng.gen_range(-scale..=scale);
        }
    }

    pub fn n_hidden(&self) -> usize {
        self.hidden_layers.iter().sum()
    }

    pub fn n_first_hidden(&self) -> usize {
        self.hidden_layers[0]
    }

    pub fn n_visible(&self) -> usize {
        self.w_vh.len() / self.n_first_hidden()
    }

    /// Visible vector for a state-action pair.
    pub fn visible(&self, state: usize, action: usize) -> Result<Vec<f64>> {
        if action >= self.n_actions {
            return Err(Error::Argument(format!(
                "action {action} out of range for {} actions",
                self.n_actions
            )));
        }
        let mut v = if self.n_states == 1 {
            if state != 0 {
                return Err(Error::Argument(format!("state {state} out of range for 1 state")));
            }
            vec![1.0]
        } else {
            encode_state(self.encoding, state, self.n_states)?
        };
        v.extend((0..self.n_actions).map(|a| if a == action { 1.0 } else { -1.0 }));
        Ok(v)
    }

    pub fn clamp(&self, state: usize, action: usize) -> Result<ClampedIsing> {
        let v = self.visible(state, action)?;
        self.clamp_visible(&v)
    }

    /// Hidden-only Ising model with visible units fixed to `visible`.
    pub fn clamp_visible(&self, visible: &[f64]) -> Result<ClampedIsing> {
        if visible.len() != self.n_visible() {
            return Err(Error::Argument(format!(
                "visible vector has {} entries, model expects {}",
                visible.len(),
                self.n_visible()
            )));
        }
        let nh1 = self.n_first_hidden();
        let mut fields = vec![0.0; self.n_hidden()];
        for (v_idx, v) in visible.iter().enumerate() {
            for h in 0..nh1 {
                fields[h] += self.w_vh[v_idx * nh1 + h] * v;
            }
        }
        let couplings = self
            .hh_edges
            .iter()
            .zip(&self.w_hh)
            .map(|(&(a, b), &w)| (a, b, w))
            .collect();
        Ok(ClampedIsing { fields, couplings })
    }
}

/// Classical Ising model over the hidden units:
/// `E(s) = -sum_h fields[h] s_h - sum_(h,h') J s_h s_h'`, `s in {-1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClampedIsing {
    pub fields: Vec<f64>,
    pub couplings: Vec<(usize, usize, f64)>,
}

impl ClampedIsing {
    pub fn n_spins(&self) -> usize {
        self.fields.len()
    }

    pub fn energy(&self, spins: &[i8]) -> f64 {
        let field: f64 = self
            .fields
            .iter()
            .zip(spins)
            .map(|(f, &s)| f * s as f64)
            .sum();
        let pair: f64 = self
            .couplings
            .iter()
            .map(|&(a, b, j)| j * (spins[a] * spins[b]) as f64)
            .sum();
        -field - pair
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> QbmModel {
        QbmModel::new(Encoding::OneHot, 3, 2, vec![2, 2], 0.5, 2.0).unwrap()
    }

    #[test]
    fn dbm_topology() {
        let m = model();
        assert_eq!(m.n_visible(), 5);
        assert_eq!(m.n_hidden(), 4);
        assert_eq!(m.hh_edges, vec![(0, 2), (0, 3), (1, 2), (1, 3)]);
        // no intra-layer edges
        for &(a, b) in &m.hh_edges {
            assert!(a < 2 && b >= 2);
        }
        let m3 = QbmModel::new(Encoding::Binary, 9, 4, vec![4, 4, 2], 0.0, 1.0).unwrap();
        assert_eq!(m3.hh_edges.len(), 16 + 8);
        assert_eq!(m3.n_visible(), 4 + 4);
    }

    #[test]
    fn invalid_models() {
        assert!(QbmModel::new(Encoding::OneHot, 3, 2, vec![], 0.5, 2.0).is_err());
        assert!(QbmModel::new(Encoding::OneHot, 3, 2, vec![2], -0.1, 2.0).is_err());
        assert!(QbmModel::new(Encoding::OneHot, 3, 2, vec![2], 0.1, 0.0).is_err());
    }

    #[test]
    fn zero_weights_clamp_to_zero() {
        let c = model().clamp(1, 0).unwrap();
        assert!(c.fields.iter().all(|f| *f == 0.0));
        assert!(c.couplings.iter().all(|c| c.2 == 0.0));
    }

    #[test]
    fn single_visible_field() {
        let mut m = QbmModel::new(Encoding::OneHot, 2, 1, vec![1], 0.0, 1.0).unwrap();
        // visible = (state0, state1, action0) = (+1, -1, +1) for state 0
        m.w_vh = vec![0.3, 0.0, 0.0];
        let c = m.clamp(0, 0).unwrap();
        assert_eq!(c.fields, vec![0.3]);
    }

    #[test]
    fn flipping_a_visible_bit_flips_its_contribution() {
        let mut m = model();
        m.w_vh = (0..m.w_vh.len()).map(|i| 0.1 * i as f64 - 0.3).collect();
        let v = m.visible(1, 1).unwrap();
        let base = m.clamp_visible(&v).unwrap();
        let mut flipped = v.clone();
        flipped[2] = -flipped[2];
        let after = m.clamp_visible(&flipped).unwrap();
        for h in 0..2 {
            let expected = base.fields[h] - 2.0 * m.w_vh[2 * 2 + h] * v[2];
            assert!((after.fields[h] - expected).abs() < 1e-12);
        }
        assert_eq!(&after.fields[2..], &base.fields[2..]);
        assert_eq!(after.couplings, base.couplings);
    }

    #[test]
    fn visible_dimension_mismatch() {
        assert!(model().clamp_visible(&[1.0; 3]).is_err());
        assert!(model().clamp(0, 2).is_err());
    }
}
