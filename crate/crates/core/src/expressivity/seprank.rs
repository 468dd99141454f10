use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::circuits::ModelSpec;
use crate::error::{validation, Result};

/// Singular values below `SVD_THRESHOLD · σ_max` do not count toward the rank.
pub const SVD_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationRankReport {
    pub grid_y: usize,
    pub grid_z: usize,
    pub threshold: f64,
    pub singular_values: Vec<f64>,
    pub rank: usize,
}

/// Numerical rank of `samples[i][j] = g(y_i, z_j)`.
pub fn numerical_rank(samples: &[Vec<f64>], threshold: f64) -> Result<SeparationRankReport> {
    let gy = samples.len();
    let gz = samples.first().map_or(0, Vec::len);
    if gy == 0 || gz == 0 || samples.iter().any(|r| r.len() != gz) {
        return Err(validation("sample matrix must be rectangular and non-empty"));
    }
    let m = DMatrix::from_fn(gy, gz, |i, j| samples[i][j]);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let top = sv.first().copied().unwrap_or(0.0);
    let rank = if top > 0.0 { sv.iter().filter(|&&s| s > threshold * top).count() } else { 0 };
    Ok(SeparationRankReport { grid_y: gy, grid_z: gz, threshold, singular_values: sv, rank })
}

/// Samples a two-input model `ℒ(y, z)` on `y_i = i/G_y`, `z_j = j/G_z` and
/// reports the numerical rank of the sample matrix.
pub fn separation_rank(model: &ModelSpec, grid_y: usize, grid_z: usize, threshold: f64) -> Result<SeparationRankReport> {
    model.validate()?;
    let mut samples = vec![vec![0.0; grid_z]; grid_y];
    for (i, row) in samples.iter_mut().enumerate() {
        let y = i as f64 / grid_y as f64;
        for (j, v) in row.iter_mut().enumerate() {
            *v = model.loss_unchecked(&[], &[y, j as f64 / grid_z as f64])?;
        }
    }
    numerical_rank(&samples, threshold)
}

/// `2 (N′(N′−1)/2)^{L−1} N′`.
pub fn predicted_separation_rank(n_prime: usize, layers: usize) -> u64 {
    2 * super::predicted_frequency_count(n_prime, layers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::presets::preset_hadamard_ladder;
    use crate::rng::seeded;
    use rand::Rng;

    #[test]
    fn product_function_has_rank_one() {
        let s: Vec<Vec<f64>> = (0..20).map(|i| (0..30).map(|j| (i as f64 * 0.3).sin() * (1.0 + j as f64).ln()).collect()).collect();
        assert_eq!(numerical_rank(&s, SVD_THRESHOLD).unwrap().rank, 1);
    }

    #[test]
    fn two_level_ladder_rank_is_stable() {
        let mut rng = seeded(3);
        let lam: Vec<Vec<f64>> = (0..2).map(|_| (0..2).map(|_| rng.random::<f64>()).collect()).collect();
        let model = preset_hadamard_ladder(2, &lam, true).unwrap();
        let coarse = separation_rank(&model, 64, 64, SVD_THRESHOLD).unwrap();
        let fine = separation_rank(&model, 128, 128, SVD_THRESHOLD).unwrap();
        assert_eq!(coarse.rank as u64, predicted_separation_rank(2, 2));
        assert_eq!(fine.rank, coarse.rank);
    }

    #[test]
    fn zero_function_has_rank_zero() {
        assert_eq!(numerical_rank(&vec![vec![0.0; 3]; 4], SVD_THRESHOLD).unwrap().rank, 0);
    }
}
