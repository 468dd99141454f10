use serde::{Deserialize, Serialize};

use crate::circuits::presets::{hierarchical_a, preset_universal_approx, universal_flat_phase, FourierCoeffs};
use crate::error::{validation, Result};

pub const DEFAULT_QUADRATURE: usize = 1 << 16;
pub const DEFAULT_GRID: usize = 10_000;

/// First `m_len` Fourier coefficients of a 1-periodic `f` by the periodic
/// trapezoid rule on `points` nodes (exact for trigonometric polynomials of
/// degree below `points − m_len`).
pub fn fourier_coefficients(f: &dyn Fn(f64) -> f64, m_len: usize, points: usize) -> FourierCoeffs {
    let tau = 2.0 * std::f64::consts::PI;
    let samples: Vec<f64> = (0..points).map(|i| f(i as f64 / points as f64)).collect();
    let mut cos = vec![0.0; m_len];
    let mut sin = vec![0.0; m_len];
    for m in 0..m_len {
        let w = if m == 0 { 1.0 } else { 2.0 } / points as f64;
        for (i, s) in samples.iter().enumerate() {
            let phase = tau * ((m * i) % points) as f64 / points as f64;
            cos[m] += w * s * phase.cos();
            sin[m] += w * s * phase.sin();
        }
    }
    sin[0] = 0.0;
    FourierCoeffs { cos, sin }
}

/// `1 − 4|x|` on `[−½, ½)`, extended periodically.
pub fn triangle_wave(x: f64) -> f64 {
    1.0 - 4.0 * (x - x.round()).abs()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniversalPoint {
    pub m: usize,
    /// `sup_x |‖f̂‖₁ ℒ(x) − f(x)|` on the grid.
    pub sup_error: f64,
    pub norm1: f64,
    /// `sup_x |ℒ(x) − S_M[f](x)/‖f̂‖₁|`: circuit against the truncated series.
    pub circuit_deviation: f64,
    pub max_abs_loss: f64,
}

/// Builds the single-layer universal circuit for each `M` and measures how
/// well the rescaled loss tracks `f` on `grid` points of `[0, 1)`.
pub fn universal_error_curve(f: &dyn Fn(f64) -> f64, ms: &[usize], grid: usize, quadrature: usize) -> Result<Vec<UniversalPoint>> {
    let mut out = Vec::with_capacity(ms.len());
    for &m in ms {
        if !m.is_power_of_two() || quadrature <= 2 * m {
            return Err(validation(format!("M = {m} must be a power of two well below the quadrature size")));
        }
        let coeffs = fourier_coefficients(f, m, quadrature);
        let (unit, norm1) = coeffs.normalized()?;
        let model = preset_universal_approx(&unit)?;
        model.validate()?;
        let (mut sup_error, mut circuit_deviation, mut max_abs_loss): (f64, f64, f64) = (0.0, 0.0, 0.0);
        for i in 0..grid {
            let x = i as f64 / grid as f64;
            let loss = model.loss_unchecked(&[], &[x])?;
            sup_error = sup_error.max((norm1 * loss - f(x)).abs());
            circuit_deviation = circuit_deviation.max((loss - unit.eval(x)).abs());
            max_abs_loss = max_abs_loss.max(loss.abs());
        }
        out.push(UniversalPoint { m, sup_error, norm1, circuit_deviation, max_abs_loss });
    }
    Ok(out)
}

/// Least-squares slope of `log(sup_error)` against `log(M)`.
pub fn loglog_slope(points: &[UniversalPoint]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| (p.m as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.sup_error.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Largest entrywise gap between `A_L ⋯ A_1` of the hierarchical ladder and
/// the flat phase of the single-layer circuit, over the inputs `xs`.
pub fn hierarchical_phase_deviation(m_len: usize, xs: &[f64]) -> Result<f64> {
    if m_len < 2 || !m_len.is_power_of_two() {
        return Err(validation("M must be a power of two ≥ 2"));
    }
    let levels = m_len.trailing_zeros() as usize;
    let n = levels + 2;
    let mut worst: f64 = 0.0;
    for &x in xs {
        let flat = universal_flat_phase(m_len).matrix(n, &[], &[x])?;
        let mut prod = hierarchical_a(n, 1).matrix(n, &[], &[x])?;
        for l in 2..=levels {
            prod = hierarchical_a(n, l).matrix(n, &[], &[x])?.mul(&prod);
        }
        worst = worst.max(prod.max_abs_diff(&flat));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn trig3(x: f64) -> f64 {
        0.3 + 0.5 * (2.0 * PI * x).cos() - 0.2 * (4.0 * PI * x).sin() + 0.4 * (6.0 * PI * x).cos()
    }

    #[test]
    fn quadrature_recovers_trigonometric_coefficients() {
        let c = fourier_coefficients(&trig3, 4, 64);
        let want_cos = [0.3, 0.5, 0.0, 0.4];
        let want_sin = [0.0, 0.0, -0.2, 0.0];
        for m in 0..4 {
            assert!((c.cos[m] - want_cos[m]).abs() < 1e-14);
            assert!((c.sin[m] - want_sin[m]).abs() < 1e-14);
        }
    }

    #[test]
    fn trigonometric_polynomial_is_exact() {
        let p = universal_error_curve(&trig3, &[4, 8], 2000, 1 << 10).unwrap();
        assert!(p.iter().all(|q| q.sup_error < 1e-9 && q.circuit_deviation < 1e-9));
    }

    #[test]
    fn triangle_error_matches_the_series_tail() {
        let ms = [8, 16, 32];
        let pts = universal_error_curve(&triangle_wave, &ms, 4000, DEFAULT_QUADRATURE).unwrap();
        for p in &pts {
            // a_m = 8/(π²m²) for odd m; the sup is attained at the peak x = 0
            let tail: f64 = (p.m..200_000).filter(|m| m % 2 == 1).map(|m| 8.0 / (PI * PI * (m * m) as f64)).sum();
            assert!((p.sup_error - tail).abs() < 1e-5, "M={} {} vs {}", p.m, p.sup_error, tail);
            assert!(p.max_abs_loss <= 1.0 + 1e-12);
            assert!(p.circuit_deviation < 1e-9);
        }
        assert!(pts.windows(2).all(|w| w[1].sup_error < w[0].sup_error));
    }

    #[test]
    fn hierarchical_product_is_the_flat_phase() {
        for m in [2, 4, 8, 16] {
            assert!(hierarchical_phase_deviation(m, &[0.0, 0.13, 0.5, 0.77]).unwrap() < 1e-12);
        }
    }
}
