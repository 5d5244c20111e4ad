use std::collections::VecDeque;

use rand::Rng;

use crate::envs::Transition;

/// Fixed-capacity FIFO of transitions with uniform sampling (with replacement).
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: VecDeque<Transition>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            items: VecDeque::with_capacity(capacity.min(1 << 16)),
        }
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn sample_indices<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Vec<usize> {
        (0..batch).map(|_| rng.gen_range(0..self.items.len())).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Vec<Transition> {
        self.sample_indices(batch, rng)
            .into_iter()
            .map(|i| self.items[i])
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tr(i: usize) -> Transition {
        Transition {
            state: i,
            action: 0,
            reward: 0.0,
            next_state: i,
            done: false,
            terminal: false,
        }
    }

    #[test]
    fn evicts_oldest() {
        let mut b = ReplayBuffer::new(3);
        for i in 0..5 {
            b.push(tr(i));
        }
        assert_eq!(b.len(), 3);
        let mut seen: Vec<usize> = b.sample(200, &mut ChaCha8Rng::seed_from_u64(1)).iter().map(|t| t.state).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen, vec![2, 3, 4]);
    }

    #[test]
    fn sampling_is_uniform() {
        let mut b = ReplayBuffer::new(10);
        for i in 0..10 {
            b.push(tr(i));
        }
        let mut counts = [0usize; 10];
        for i in b.sample_indices(100_000, &mut ChaCha8Rng::seed_from_u64(7)) {
            counts[i] += 1;
        }
        // binomial(1e5, 0.1): mean 1e4, sd ~ 94.9
        for c in counts {
            assert!((c as f64 - 1e4).abs() < 3.0 * 94.87, "{counts:?}");
        }
    }
}
