//! Classical linear classification with shared randomness.
//!
//! Alice holds `x`, Bob holds `y`, both unit vectors with `|x·y| ≥ γ`. Alice
//! sends a quantized Johnson–Lindenstrauss sketch of `x`, Bob compares it with
//! the sketch of `y` and replies with the sign. The sketch length depends on
//! `γ` only.

mod sketch;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use sketch::{jl_project, BinarySketchMatrix, SketchRows};

use crate::error::{structural, validation, Result};
use crate::linalg::{dot, gaussian_vector, gram_schmidt, real_norm};
use crate::protocol::{CommLedger, Party};
use crate::tolerance::ceil_robust;

pub const DEFAULT_C: f64 = 64.0;
pub const DEFAULT_BITS_PER_COORD: u32 = 16;

/// Clipping range of the quantizer, in units of `1/√k` (one sketch
/// coordinate of a unit vector has standard deviation `1/√k`).
const CLIP_SIGMAS: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginInstance {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub gamma: f64,
    pub label: i8,
}

impl MarginInstance {
    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn inner(&self) -> f64 {
        dot(&self.x, &self.y)
    }
}

fn sign(v: f64) -> i8 {
    if v >= 0.0 {
        1
    } else {
        -1
    }
}

/// `x` uniform on the sphere, `y = label·(γx + √(1−γ²)w)` with `w ⊥ x`.
pub fn gen_margin_instance<R: Rng + ?Sized>(n: usize, gamma: f64, label: i8, rng: &mut R) -> Result<MarginInstance> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(validation(format!("margin must lie in (0, 1], got {gamma}")));
    }
    if label != 1 && label != -1 {
        return Err(validation("label must be ±1"));
    }
    if n < 2 {
        return Err(structural("margin instances need dimension at least 2"));
    }
    let basis = loop {
        let b = gram_schmidt(vec![gaussian_vector(rng, n), gaussian_vector(rng, n)]);
        if b.len() == 2 {
            break b;
        }
    };
    let (x, w) = (&basis[0], &basis[1]);
    let s = f64::from(label);
    let c = (1.0 - gamma * gamma).max(0.0).sqrt();
    let y = x.iter().zip(w).map(|(a, b)| s * (gamma * a + c * b)).collect();
    Ok(MarginInstance { x: x.clone(), y, gamma, label })
}

/// Sketch length `⌈C/(γ/8)²⌉`.
pub fn sketch_dim(gamma: f64, c: f64) -> usize {
    ceil_robust(c / (gamma / 8.0).powi(2)) as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOutcome {
    pub predicted: i8,
    /// Sketch length; `0` for the full-vector fallback.
    pub k: usize,
    /// `q(f(x))·f(y)` as computed by Bob.
    pub sketch_product: f64,
    /// Cauchy–Schwarz bound on the quantization error of `sketch_product`.
    pub quantization_error: f64,
    pub ledger: CommLedger,
}

fn quantize(v: &[f64], range: f64, bits: u32) -> Vec<f64> {
    let levels = ((1u64 << bits) - 1) as f64;
    let step = 2.0 * range / levels;
    v.iter()
        .map(|&a| {
            let idx = ((a.clamp(-range, range) + range) / step).round();
            -range + idx * step
        })
        .collect()
}

/// One run of the sketch protocol on `instance`, with the shared sketch seed
/// drawn from `rng`.
///
/// Alice sends `k · bits_per_coord` bits, Bob answers with one bit. With
/// `gamma = 0` the sketch is skipped and Alice sends all `N` coordinates.
/// Fails if quantization could move the product by `γ/8` or more.
pub fn classify_distributed<R: Rng + ?Sized>(
    instance: &MarginInstance,
    gamma: f64,
    c: f64,
    bits_per_coord: u32,
    rng: &mut R,
) -> Result<ClassifyOutcome> {
    if !(1..=32).contains(&bits_per_coord) {
        return Err(validation("bits_per_coord must be in 1..=32"));
    }
    if !(0.0..=1.0).contains(&gamma) || c <= 0.0 {
        return Err(validation("need 0 ≤ γ ≤ 1 and C > 0"));
    }
    let n = instance.n();
    let mut ledger = CommLedger::new();
    let (k, fx, fy, range) = if gamma == 0.0 {
        (0, instance.x.clone(), instance.y.clone(), 1.0)
    } else {
        let k = sketch_dim(gamma, c);
        let sketch = BinarySketchMatrix::seeded(rng.random(), k, n);
        let mut f = sketch.project_many(&[&instance.x, &instance.y])?;
        let fy = f.pop().unwrap_or_default();
        let fx = f.pop().unwrap_or_default();
        (k, fx, fy, CLIP_SIGMAS / (k as f64).sqrt())
    };
    let qx = quantize(&fx, range, bits_per_coord);
    let err: Vec<f64> = qx.iter().zip(&fx).map(|(a, b)| a - b).collect();
    let quantization_error = real_norm(&err) * real_norm(&fy);
    if gamma > 0.0 && quantization_error >= gamma / 8.0 {
        return Err(validation(format!("quantization error {quantization_error:.3e} reaches γ/8; raise bits_per_coord")));
    }
    ledger.send_bits(Party::Alice, fx.len() as u64 * u64::from(bits_per_coord));
    let sketch_product = dot(&qx, &fy);
    ledger.send_bits(Party::Bob, 1);
    Ok(ClassifyOutcome { predicted: sign(sketch_product), k, sketch_product, quantization_error, ledger })
}

/// Distortion check for the three points `{x, y, 0}`: every squared
/// distance is preserved within a factor `1 ± ε`.
pub fn three_point_isometry(x: &[f64], y: &[f64], fx: &[f64], fy: &[f64], eps: f64) -> bool {
    let d2 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>();
    let zero = vec![0.0; x.len()];
    let fzero = vec![0.0; fx.len()];
    [(d2(x, &zero), d2(fx, &fzero)), (d2(y, &zero), d2(fy, &fzero)), (d2(x, y), d2(fx, fy))]
        .iter()
        .all(|&(d, fd)| (1.0 - eps) * d <= fd && fd <= (1.0 + eps) * d)
}

pub fn hamming_distance(a: &[bool], b: &[bool]) -> usize {
    a.iter().zip(b).filter(|(u, v)| u != v).count()
}

/// Embeds a Gap-Hamming pair as unit vectors `x = (2x̂−1)/√N`, `y = (2ŷ−1)/√N`.
///
/// `x·y = (N − 2d_H)/N`, so large Hamming distance gives a *negative* inner
/// product: `d_H ≥ N/2 + g/2 ⇒ x·y ≤ −g/N` and `d_H ≤ N/2 − g/2 ⇒ x·y ≥ g/N`.
/// The returned margin is `g/N`; pairs inside the gap are rejected.
pub fn gap_hamming_to_margin(x_hat: &[bool], y_hat: &[bool], g: usize) -> Result<MarginInstance> {
    if x_hat.len() != y_hat.len() {
        return Err(structural("bit vectors have different lengths"));
    }
    let n = x_hat.len();
    if n == 0 {
        return Err(structural("empty bit vectors"));
    }
    let d = hamming_distance(x_hat, y_hat);
    if 2 * d > n && 2 * d < n + g || 2 * d <= n && 2 * d + g > n && g > 0 {
        return Err(validation(format!("d_H = {d} lies inside the gap around N/2 = {n}/2 (g = {g})")));
    }
    let s = 1.0 / (n as f64).sqrt();
    let embed = |v: &[bool]| v.iter().map(|&b| if b { s } else { -s }).collect::<Vec<_>>();
    let (x, y) = (embed(x_hat), embed(y_hat));
    let label = sign(n as f64 - 2.0 * d as f64);
    Ok(MarginInstance { x, y, gamma: g as f64 / n as f64, label })
}
