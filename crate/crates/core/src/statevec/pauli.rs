use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{structural, Error, Result};
use crate::linalg::CMat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-qubit Paulis, one label per qubit (qubit 0 first).
///
/// Serialized as a plain string such as `"XIZ"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    labels: Vec<Pauli>,
}

impl PauliString {
    pub fn new(labels: Vec<Pauli>) -> Self {
        Self { labels }
    }

    pub fn identity(n: usize) -> Self {
        Self { labels: vec![Pauli::I; n] }
    }

    /// `p` on qubit `q`, identity elsewhere.
    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut labels = vec![Pauli::I; n];
        labels[q] = p;
        Self { labels }
    }

    pub fn labels(&self) -> &[Pauli] {
        &self.labels
    }

    pub fn n_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn is_identity(&self) -> bool {
        self.labels.iter().all(|&p| p == Pauli::I)
    }

    /// Bit masks `(x, z, #Y)` over basis indices, qubit 0 = MSB.
    pub fn masks(&self) -> (usize, usize, u32) {
        let n = self.labels.len();
        let (mut x, mut z, mut ny) = (0usize, 0usize, 0u32);
        for (q, p) in self.labels.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => x |= bit,
                Pauli::Z => z |= bit,
                Pauli::Y => {
                    x |= bit;
                    z |= bit;
                    ny += 1;
                }
            }
        }
        (x, z, ny)
    }

    /// Prepends `k` identity labels, i.e. shifts every qubit index by `k`.
    pub fn lifted(&self, k: usize) -> PauliString {
        let mut labels = vec![Pauli::I; k];
        labels.extend_from_slice(&self.labels);
        PauliString { labels }
    }

    /// `P|ψ⟩` written into `out` (which must not alias `amps`).
    pub fn apply_into(&self, amps: &[C64], out: &mut [C64]) {
        let (x, z, ny) = self.masks();
        let base = i_pow(ny);
        for (i, a) in amps.iter().enumerate() {
            let sign = if (i & z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            out[i ^ x] = base * sign * a;
        }
    }

    pub fn apply_vec(&self, amps: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); amps.len()];
        self.apply_into(amps, &mut out);
        out
    }

    /// `exp(−½ i angle P)` applied in place.
    pub fn rotate_in_place(&self, amps: &mut [C64], angle: f64) {
        let (c, s) = ((0.5 * angle).cos(), (0.5 * angle).sin());
        let (x, z, ny) = self.masks();
        let base = i_pow(ny) * C64::new(0.0, -s);
        let phase = |i: usize| if (i & z).count_ones() % 2 == 1 { -base } else { base };
        if x == 0 {
            for (i, a) in amps.iter_mut().enumerate() {
                *a = *a * c + phase(i) * *a;
            }
            return;
        }
        // Pair i with i^x; visit each pair once from the side whose top x-bit is clear.
        let top = 1usize << (usize::BITS - 1 - x.leading_zeros());
        for i in 0..amps.len() {
            if i & top != 0 {
                continue;
            }
            let j = i ^ x;
            let (ai, aj) = (amps[i], amps[j]);
            amps[j] = aj * c + phase(i) * ai;
            amps[i] = ai * c + phase(j) * aj;
        }
    }

    /// `P|ψ⟩` in place.
    pub fn apply_in_place(&self, amps: &mut [C64]) {
        let (x, z, ny) = self.masks();
        let base = i_pow(ny);
        let phase = |i: usize| if (i & z).count_ones() % 2 == 1 { -base } else { base };
        if x == 0 {
            for (i, a) in amps.iter_mut().enumerate() {
                *a *= phase(i);
            }
            return;
        }
        let top = 1usize << (usize::BITS - 1 - x.leading_zeros());
        for i in 0..amps.len() {
            if i & top != 0 {
                continue;
            }
            let j = i ^ x;
            let (ai, aj) = (amps[i], amps[j]);
            amps[j] = phase(i) * ai;
            amps[i] = phase(j) * aj;
        }
    }

    /// `⟨ψ|P|ψ⟩`, real because `P` is Hermitian.
    pub fn expectation_amps(&self, amps: &[C64]) -> f64 {
        let (x, z, ny) = self.masks();
        let base = i_pow(ny);
        let mut acc = C64::new(0.0, 0.0);
        for (i, a) in amps.iter().enumerate() {
            let sign = if (i & z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            acc += amps[i ^ x].conj() * base * sign * a;
        }
        acc.re
    }

    pub fn to_matrix(&self) -> CMat {
        let dim = 1usize << self.labels.len();
        let mut m = CMat::zeros(dim);
        let (x, z, ny) = self.masks();
        let base = i_pow(ny);
        for i in 0..dim {
            let sign = if (i & z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            m.set(i ^ x, i, base * sign);
        }
        m
    }

    pub fn check_width(&self, n: usize) -> Result<()> {
        if self.labels.len() != n {
            return Err(structural(format!(
                "Pauli string `{self}` has {} labels, register has {n} qubits",
                self.labels.len()
            )));
        }
        Ok(())
    }
}

fn i_pow(k: u32) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.labels.iter().try_for_each(|p| write!(f, "{}", p.as_char()))
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let labels = s
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(structural(format!("invalid Pauli label `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if labels.is_empty() {
            return Err(structural("empty Pauli string"));
        }
        Ok(Self { labels })
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn single_qubit_matrices() {
        let y = "Y".parse::<PauliString>().unwrap().to_matrix();
        assert_eq!(y.get(0, 1), c(0.0, -1.0));
        assert_eq!(y.get(1, 0), c(0.0, 1.0));
        let z = "Z".parse::<PauliString>().unwrap().to_matrix();
        assert_eq!(z.get(1, 1), c(-1.0, 0.0));
    }

    #[test]
    fn qubit_zero_is_most_significant() {
        let p = PauliString::single(3, 0, Pauli::X);
        let mut v = vec![c(0.0, 0.0); 8];
        v[0] = c(1.0, 0.0);
        let out = p.apply_vec(&v);
        assert_eq!(out[4], c(1.0, 0.0));
    }

    #[test]
    fn in_place_matches_out_of_place_and_rotation_at_pi() {
        let p: PauliString = "XYZ".parse().unwrap();
        let v: Vec<C64> = (0..8).map(|i| c(i as f64 * 0.1, 1.0 - i as f64 * 0.05)).collect();
        let out = p.apply_vec(&v);
        let mut w = v.clone();
        p.apply_in_place(&mut w);
        let mut r = v.clone();
        // exp(−iπP/2) = −iP
        p.rotate_in_place(&mut r, std::f64::consts::PI);
        for i in 0..8 {
            assert!((out[i] - w[i]).norm() < 1e-15);
            assert!((r[i] - c(0.0, -1.0) * out[i]).norm() < 1e-14);
        }
    }

    #[test]
    fn string_roundtrip() {
        let p: PauliString = "IXYZ".parse().unwrap();
        assert_eq!(p.to_string(), "IXYZ");
        assert_eq!(serde_json::to_string(&p).unwrap(), "\"IXYZ\"");
        assert!("IXQ".parse::<PauliString>().is_err());
    }
}
