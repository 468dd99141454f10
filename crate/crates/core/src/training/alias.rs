//! Vose's alias method: O(n) build, O(1) draws.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{validation, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AliasSampler {
    prob: Vec<f64>,
    alias: Vec<usize>,
}

impl AliasSampler {
    /// Sampler over indices with probability proportional to `weights`.
    pub fn new(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(validation("alias weights must be finite and non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(validation("alias weights sum to zero"));
        }
        let n = weights.len();
        let mut scaled: Vec<f64> = weights.iter().map(|w| w * n as f64 / total).collect();
        let mut prob = vec![0.0; n];
        let mut alias = vec![0; n];
        let (mut small, mut large): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| scaled[i] < 1.0);
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            prob[s] = scaled[s];
            alias[s] = l;
            scaled[l] -= 1.0 - scaled[s];
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers are 1 up to rounding.
        for i in large.into_iter().chain(small) {
            prob[i] = 1.0;
            alias[i] = i;
        }
        Ok(Self { prob, alias })
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let i = rng.random_range(0..self.prob.len());
        if rng.random::<f64>() < self.prob[i] {
            i
        } else {
            self.alias[i]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn frequencies_match_weights() {
        let w = [0.1, 0.0, 2.0, 0.7, 1.2];
        let s = AliasSampler::new(&w).unwrap();
        let mut rng = seeded(33);
        let draws = 1_000_000;
        let mut counts = [0u32; 5];
        for _ in 0..draws {
            counts[s.sample(&mut rng)] += 1;
        }
        let total: f64 = w.iter().sum();
        for (c, wi) in counts.iter().zip(w) {
            let p = wi / total;
            let sigma = (p * (1.0 - p) / draws as f64).sqrt();
            let f = *c as f64 / draws as f64;
            assert!((f - p).abs() <= 4.0 * sigma + 1e-12, "p {p} f {f}");
        }
        assert_eq!(counts[1], 0);
    }

    #[test]
    fn last_small_entry_is_kept() {
        // rounding leaves the final large entry just below 1 while `small` is non-empty
        let w = [0.522, 0.638, 0.977, 0.963];
        let s = AliasSampler::new(&w).unwrap();
        let total: f64 = w.iter().sum();
        let n = w.len() as f64;
        for (i, wi) in w.iter().enumerate() {
            let mass = s.prob[i] + (0..w.len()).filter(|&j| s.alias[j] == i && j != i).map(|j| 1.0 - s.prob[j]).sum::<f64>();
            assert!((mass / n - wi / total).abs() < 1e-12, "index {i}");
        }
    }

    #[test]
    fn rejects_degenerate_weights() {
        assert!(AliasSampler::new(&[0.0, 0.0]).is_err());
        assert!(AliasSampler::new(&[1.0, -1.0]).is_err());
        assert!(AliasSampler::new(&[]).is_err());
    }
}
