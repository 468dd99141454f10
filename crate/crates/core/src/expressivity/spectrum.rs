use serde::{Deserialize, Serialize};

use crate::circuits::ModelSpec;
use crate::error::{validation, Error, Result};
use crate::tolerance::TOL;

/// Path enumeration gives up beyond this many (j̄, k̄) pairs.
pub const MAX_PATH_PAIRS: u64 = 10_000_000;

/// Coefficients at or below this magnitude count as zero.
pub const COEFF_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTerm {
    pub frequency: f64,
    pub cos: f64,
    pub sin: f64,
}

/// `ℒ(x) = Σ cos·cos(2πfx) + sin·sin(2πfx)` over non-negative `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTable {
    pub entries: Vec<FrequencyTerm>,
    pub merge_tol: f64,
    pub coeff_tol: f64,
}

impl FrequencyTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let tau = 2.0 * std::f64::consts::PI;
        self.entries.iter().map(|t| t.cos * (tau * t.frequency * x).cos() + t.sin * (tau * t.frequency * x).sin()).sum()
    }
}

/// Terms `(Λ_j̄ − Λ_k̄, a_j̄ a_k̄)` of the Hadamard-mixed ladder.
///
/// The loss is `Σ_j φ_j* φ_{j⊕N′/2}` with `φ_j` a sum over paths of Hadamard
/// amplitudes `±N′^{−1/2}` times `e^{−2πiΛx}`, so every pair of paths ending
/// at `j` and `j ⊕ N′/2` contributes one exponential.
fn path_terms(n_prime: usize, lambdas: &[Vec<f64>]) -> Result<Vec<(f64, f64)>> {
    let layers = lambdas.len();
    let pairs = (n_prime as u64).checked_pow((2 * layers).saturating_sub(1) as u32);
    match pairs {
        Some(p) if p <= MAX_PATH_PAIRS => {}
        _ => return Err(Error::Capacity(format!("N′ = {n_prime}, L = {layers} exceeds {MAX_PATH_PAIRS} path pairs"))),
    }
    let amp = 1.0 / (n_prime as f64).sqrt();
    let h = |row: usize, col: usize| if (row & col).count_ones().is_multiple_of(2) { amp } else { -amp };
    // every path from |0⟩, grouped by endpoint: (amplitude, Λ)
    let mut by_end: Vec<Vec<(f64, f64)>> = vec![vec![]; n_prime];
    let mut frontier = vec![(0usize, 1.0, 0.0)];
    for row in lambdas {
        frontier = frontier
            .into_iter()
            .flat_map(|(prev, a, lam)| (0..n_prime).map(move |j| (j, a * h(j, prev), lam + row[j])))
            .collect();
    }
    for (end, a, lam) in frontier {
        by_end[end].push((a, lam));
    }
    let half = n_prime / 2;
    let mut terms = Vec::new();
    for (j, paths) in by_end.iter().enumerate() {
        for &(aj, fj) in paths {
            for &(ak, fk) in &by_end[j ^ half] {
                terms.push((fj - fk, aj * ak));
            }
        }
    }
    Ok(terms)
}

/// Exact spectrum of the Hadamard-mixed ladder
/// ([`crate::circuits::presets::preset_hadamard_ladder`], one variable).
pub fn enumerate_spectrum(n_prime: usize, lambdas: &[Vec<f64>]) -> Result<FrequencyTable> {
    if n_prime < 2 || !n_prime.is_power_of_two() || lambdas.is_empty() || lambdas.iter().any(|r| r.len() != n_prime) {
        return Err(validation("need N′ a power of two ≥ 2 and L ≥ 1 rows of N′ frequencies"));
    }
    // Hadamard amplitudes are real, so Re Σ c·e^{2πifx} = Σ c·cos(2π|f|x)
    let mut folded: Vec<(f64, f64)> = path_terms(n_prime, lambdas)?.into_iter().map(|(f, c)| (f.abs(), c)).collect();
    folded.sort_by(|a, b| a.0.total_cmp(&b.0));
    let merge_tol = TOL.frequency_merge;
    let mut entries: Vec<FrequencyTerm> = Vec::new();
    let mut start = f64::NEG_INFINITY;
    for (f, c) in folded {
        match entries.last_mut() {
            Some(last) if f - start <= merge_tol => last.cos += c,
            _ => {
                start = f;
                entries.push(FrequencyTerm { frequency: f, cos: c, sin: 0.0 });
            }
        }
    }
    entries.retain(|t| t.cos.abs() > COEFF_TOL || t.sin.abs() > COEFF_TOL);
    Ok(FrequencyTable { entries, merge_tol, coeff_tol: COEFF_TOL })
}

/// `(N′(N′−1)/2)^{L−1} · N′`.
pub fn predicted_frequency_count(n_prime: usize, layers: usize) -> u64 {
    let pairs = (n_prime * (n_prime - 1) / 2) as u64;
    pairs.pow(layers.saturating_sub(1) as u32) * n_prime as u64
}

/// Largest `|ℒ(x) − table(x)|` over `points` equally spaced `x ∈ [0, 1]`.
pub fn spectrum_vs_grid(model: &ModelSpec, table: &FrequencyTable, points: usize) -> Result<f64> {
    model.validate()?;
    let mut worst: f64 = 0.0;
    for i in 0..points {
        let x = if points > 1 { i as f64 / (points - 1) as f64 } else { 0.0 };
        worst = worst.max((model.loss_unchecked(&[], &[x])? - table.eval(x)).abs());
    }
    Ok(worst)
}
