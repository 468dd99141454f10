//! Small dense complex matrices and the orthogonalization helpers used by presets.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{structural, Result};

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMat {
    pub dim: usize,
    pub data: Vec<C64>,
}

impl CMat {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(structural("matrix rows must all have length equal to the row count"));
        }
        Ok(Self { dim, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| C64::new(v, 0.0)).collect())
                .collect(),
        )
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = d;
        }
        m
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn check_square(&self) -> Result<()> {
        if self.data.len() != self.dim * self.dim {
            return Err(structural(format!(
                "matrix data has {} entries, expected {}",
                self.data.len(),
                self.dim * self.dim
            )));
        }
        Ok(())
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.dim, other.dim, "matrix dimension mismatch");
        let d = self.dim;
        let mut out = CMat::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * other.data[k * d + j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim, "vector length mismatch");
        let d = self.dim;
        (0..d)
            .map(|i| self.data[i * d..(i + 1) * d].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn adjoint(&self) -> CMat {
        let d = self.dim;
        let mut out = CMat::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.data[j * d + i] = self.data[i * d + j].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> CMat {
        CMat { dim: self.dim, data: self.data.iter().map(|v| v * s).collect() }
    }

    /// Max-entry distance to another matrix.
    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |(U†U − I)_ij|`.
    pub fn unitarity_error(&self) -> f64 {
        self.adjoint().mul(self).max_abs_diff(&CMat::identity(self.dim))
    }

    pub fn hermitian_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// `max |(O² − I)_ij|`.
    pub fn involution_error(&self) -> f64 {
        self.mul(self).max_abs_diff(&CMat::identity(self.dim))
    }
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn real_norm(v: &[f64]) -> f64 {
    v.iter().map(|z| z * z).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Householder reflection sending unit vector `a` to `e^{iα} b`.
///
/// Returns the reflection vector `w` of `I − 2ww†/‖w‖²` together with `α`,
/// the smallest phase making `⟨a|e^{iα}b⟩` real. For real vectors `α = 0`
/// and the map is exact.
pub fn householder_map(a: &[C64], b: &[C64]) -> (Vec<C64>, f64) {
    let ab = inner(a, b);
    let mut alpha = if ab.norm() > 0.0 { -ab.arg() } else { 0.0 };
    if alpha > std::f64::consts::FRAC_PI_2 {
        alpha -= std::f64::consts::PI;
    } else if alpha <= -std::f64::consts::FRAC_PI_2 {
        alpha += std::f64::consts::PI;
    }
    let phase = C64::from_polar(1.0, alpha);
    let w: Vec<C64> = a.iter().zip(b).map(|(x, y)| x - phase * y).collect();
    (w, alpha)
}

/// Dense form of `I − 2ww†/‖w‖²` (identity when `w` vanishes).
pub fn householder_matrix(w: &[C64]) -> CMat {
    let d = w.len();
    let mut m = CMat::identity(d);
    let n2: f64 = w.iter().map(|z| z.norm_sqr()).sum();
    if n2 < 1e-300 {
        return m;
    }
    for i in 0..d {
        for j in 0..d {
            let v = m.get(i, j) - w[i] * w[j].conj() * (2.0 / n2);
            m.set(i, j, v);
        }
    }
    m
}

/// Orthonormalizes `vectors` in order (modified Gram–Schmidt, two passes).
///
/// Vectors that become numerically dependent are dropped.
pub fn gram_schmidt(vectors: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for mut v in vectors {
        for _ in 0..2 {
            for b in &basis {
                let p = dot(b, &v);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
        }
        let n = real_norm(&v);
        if n > 1e-10 {
            v.iter_mut().for_each(|x| *x /= n);
            basis.push(v);
        }
    }
    basis
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Haar-ish random real orthogonal matrix (rows orthonormal), via Gram–Schmidt
/// of a Gaussian matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<Vec<f64>> {
    loop {
        let rows = gram_schmidt((0..dim).map(|_| gaussian_vector(rng, dim)).collect());
        if rows.len() == dim {
            return rows;
        }
    }
}

/// Completes an orthonormal set `seed` to a full orthonormal basis of ℝ^dim,
/// keeping the seed vectors first and in order.
pub fn complete_basis<R: Rng + ?Sized>(rng: &mut R, seed: Vec<Vec<f64>>, dim: usize) -> Vec<Vec<f64>> {
    let mut basis = gram_schmidt(seed);
    while basis.len() < dim {
        let mut cand = basis.clone();
        cand.push(gaussian_vector(rng, dim));
        basis = gram_schmidt(cand);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn householder_maps_a_to_phased_b() {
        let a = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        let s = 1.0 / 3f64.sqrt();
        let b = vec![C64::new(0.0, s), C64::new(s, 0.0), C64::new(0.0, -s)];
        let (w, alpha) = householder_map(&a, &b);
        let h = householder_matrix(&w);
        assert!(h.unitarity_error() < 1e-12);
        let ha = h.matvec(&a);
        let phase = C64::from_polar(1.0, alpha);
        for (x, y) in ha.iter().zip(&b) {
            assert!((x - phase * y).norm() < 1e-12);
        }
    }

    #[test]
    fn householder_real_negative_overlap_is_exact() {
        let a = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let b = vec![C64::new(-0.6, 0.0), C64::new(0.8, 0.0)];
        let (w, alpha) = householder_map(&a, &b);
        assert_eq!(alpha, 0.0);
        let ha = householder_matrix(&w).matvec(&a);
        assert!((ha[0] - b[0]).norm() < 1e-15 && (ha[1] - b[1]).norm() < 1e-15);
    }

    #[test]
    fn random_orthogonal_is_orthogonal() {
        let mut rng = seeded(3);
        let o = random_orthogonal(&mut rng, 8);
        let m = CMat::from_real_rows(&o).unwrap();
        assert!(m.unitarity_error() < 1e-12);
    }

    #[test]
    fn complete_basis_keeps_seed_first() {
        let mut rng = seeded(4);
        let v = vec![0.6, 0.8, 0.0, 0.0];
        let b = complete_basis(&mut rng, vec![v.clone()], 4);
        assert_eq!(b.len(), 4);
        assert!((b[0][0] - 0.6).abs() < 1e-15 && (b[0][1] - 0.8).abs() < 1e-15);
        assert!(CMat::from_real_rows(&b).unwrap().unitarity_error() < 1e-12);
    }
}
