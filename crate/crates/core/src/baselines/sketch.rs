use rand::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{structural, Result};
use crate::rng::SimRng;

/// Where the rows of a sketch come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SketchRows {
    /// Regenerated on demand from a shared seed, row after row.
    Seeded(u64),
    /// Bit-packed rows, least significant bit first.
    Explicit(Vec<Vec<u8>>),
}

/// `k × N` matrix of i.i.d. uniform bits shared by both parties.
///
/// Seeded sketches never materialize: with `k ≈ 10⁵` and `N ≈ 10⁴` the
/// matrix would not fit comfortably in memory, so each projection streams
/// the rows out of the generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinarySketchMatrix {
    k: usize,
    n: usize,
    rows: SketchRows,
}

impl BinarySketchMatrix {
    pub fn seeded(seed: u64, k: usize, n: usize) -> Self {
        Self { k, n, rows: SketchRows::Seeded(seed) }
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(structural("sketch rows have different lengths"));
        }
        let packed = rows
            .iter()
            .map(|r| {
                let mut bytes = vec![0u8; n.div_ceil(8)];
                for (j, &b) in r.iter().enumerate() {
                    if b {
                        bytes[j / 8] |= 1 << (j % 8);
                    }
                }
                bytes
            })
            .collect();
        Ok(Self { k: rows.len(), n, rows: SketchRows::Explicit(packed) })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn for_each_row(&self, mut f: impl FnMut(usize, &[u8])) {
        match &self.rows {
            SketchRows::Seeded(seed) => {
                let mut rng = SimRng::seed_from_u64(*seed);
                let mut buf = vec![0u8; self.n.div_ceil(8)];
                for i in 0..self.k {
                    rng.fill_bytes(&mut buf);
                    f(i, &buf);
                }
            }
            SketchRows::Explicit(rows) => rows.iter().enumerate().for_each(|(i, r)| f(i, r)),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<bool>> {
        let mut out = Vec::with_capacity(self.k);
        self.for_each_row(|_, bytes| out.push((0..self.n).map(|j| bytes[j / 8] >> (j % 8) & 1 == 1).collect()));
        out
    }

    /// `f(z) = (2R − 1)z / √k` for every `z` in `zs`, sharing one pass over `R`.
    pub fn project_many(&self, zs: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        if zs.iter().any(|z| z.len() != self.n) {
            return Err(structural(format!("sketch expects vectors of length {}", self.n)));
        }
        let m = zs.len();
        let chunks = self.n.div_ceil(8);
        // table[(c·256 + b)·m + v] = Σ_j (±1) z_v[8c + j] for byte pattern b of chunk c
        let mut table = vec![0.0; chunks * 256 * m];
        for c in 0..chunks {
            for (v, z) in zs.iter().enumerate() {
                let at = |j: usize| z.get(8 * c + j).copied().unwrap_or(0.0);
                let base = (c * 256) * m + v;
                table[base] = -(0..8).map(at).sum::<f64>();
                for b in 1..256usize {
                    let low = b.trailing_zeros() as usize;
                    table[base + b * m] = table[base + (b & (b - 1)) * m] + 2.0 * at(low);
                }
            }
        }
        let scale = 1.0 / (self.k as f64).sqrt();
        let mut out = vec![vec![0.0; self.k]; m];
        let mut acc = vec![0.0; m];
        self.for_each_row(|i, bytes| {
            acc.iter_mut().for_each(|a| *a = 0.0);
            for (c, &b) in bytes.iter().enumerate() {
                let row = &table[(c * 256 + b as usize) * m..][..m];
                acc.iter_mut().zip(row).for_each(|(a, t)| *a += t);
            }
            for (o, a) in out.iter_mut().zip(&acc) {
                o[i] = a * scale;
            }
        });
        Ok(out)
    }
}

pub fn jl_project(z: &[f64], r: &BinarySketchMatrix) -> Result<Vec<f64>> {
    Ok(r.project_many(&[z])?.pop().unwrap_or_default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, gaussian_vector, real_norm};
    use crate::rng::seeded;

    fn dense_projection(r: &[Vec<bool>], z: &[f64]) -> Vec<f64> {
        let k = r.len() as f64;
        r.iter()
            .map(|row| row.iter().zip(z).map(|(&b, x)| if b { *x } else { -*x }).sum::<f64>() / k.sqrt())
            .collect()
    }

    #[test]
    fn zero_maps_to_zero() {
        let r = BinarySketchMatrix::seeded(3, 20, 13);
        assert!(jl_project(&[0.0; 13], &r).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn streamed_projection_matches_dense_product() {
        let mut rng = seeded(4);
        for n in [1, 7, 8, 9, 30] {
            let r = BinarySketchMatrix::seeded(n as u64, 11, n);
            let z = gaussian_vector(&mut rng, n);
            let got = jl_project(&z, &r).unwrap();
            let want = dense_projection(&r.to_dense(), &z);
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() < 1e-12);
            }
            let again = BinarySketchMatrix::from_rows(&r.to_dense()).unwrap();
            assert_eq!(jl_project(&z, &again).unwrap(), got);
        }
    }

    #[test]
    fn hadamard_sketch_is_an_isometry() {
        let n = 16;
        let rows: Vec<Vec<bool>> = (0..n).map(|i: usize| (0..n).map(|j: usize| (i & j).count_ones().is_multiple_of(2)).collect()).collect();
        let r = BinarySketchMatrix::from_rows(&rows).unwrap();
        let mut rng = seeded(5);
        let z = gaussian_vector(&mut rng, n);
        assert!((real_norm(&jl_project(&z, &r).unwrap()) - real_norm(&z)).abs() < 1e-12);
    }

    #[test]
    fn inner_product_is_unbiased() {
        let mut rng = seeded(6);
        let n = 16;
        let mut x = gaussian_vector(&mut rng, n);
        let mut y = gaussian_vector(&mut rng, n);
        let (nx, ny) = (real_norm(&x), real_norm(&y));
        x.iter_mut().for_each(|v| *v /= nx);
        y.iter_mut().for_each(|v| *v /= ny);
        let trials = 10_000;
        let samples: Vec<f64> = (0..trials)
            .map(|s| {
                let f = BinarySketchMatrix::seeded(s, 4, n).project_many(&[&x, &y]).unwrap();
                dot(&f[0], &f[1])
            })
            .collect();
        let mean = samples.iter().sum::<f64>() / trials as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        let sigma = (var / trials as f64).sqrt();
        assert!((mean - dot(&x, &y)).abs() < 4.0 * sigma, "{mean} vs {}", dot(&x, &y));
    }
}
