//! Dense statevector simulation.

mod observable;
mod pauli;
mod unitary;

pub use observable::{draw_pm, expectation, sample_pm, sample_pm_many, Observable};
pub use pauli::{Pauli, PauliString};
pub use unitary::{apply, apply_in_place, UnitarySpec};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{structural, validation, Result};
use crate::linalg;
use crate::tolerance::TOL;

/// Largest register the dense backend accepts.
pub const MAX_QUBITS: usize = 22;

/// Unit-norm amplitude vector over `n_qubits` qubits. Qubit 0 is the most
/// significant bit of the basis index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_width(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(structural(format!("basis index {index} out of range for {n_qubits} qubits")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    /// Wraps amplitudes whose norm is within the user-input tolerance of one,
    /// then renormalizes so the stored norm is exact to machine precision.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(structural(format!("amplitude vector length {dim} is not a power of two")));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_width(n_qubits)?;
        let n = linalg::norm(&amps);
        if (n - 1.0).abs() > TOL.input_norm {
            return Err(validation(format!("amplitude vector has norm {n}, expected 1")));
        }
        Ok(Self { n_qubits, amps: amps.into_iter().map(|a| a / n).collect() })
    }

    /// Amplitude encoding of a real unit vector.
    pub fn from_real(x: &[f64]) -> Result<Self> {
        Self::from_amplitudes(x.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    /// Internal constructor for amplitudes already known to be normalized.
    pub(crate) fn from_raw(n_qubits: usize, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n_qubits);
        Self { n_qubits, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.amps)
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        linalg::inner(&self.amps, &other.amps)
    }

    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// `|a⟩ ⊗ |self⟩` with `a` a single-qubit state placed on the new qubit 0.
    pub fn prepend_qubit(&self, a0: C64, a1: C64) -> StateVector {
        let mut amps = Vec::with_capacity(2 * self.dim());
        amps.extend(self.amps.iter().map(|v| a0 * v));
        amps.extend(self.amps.iter().map(|v| a1 * v));
        StateVector { n_qubits: self.n_qubits + 1, amps }
    }

    /// `(|0⟩|a⟩ + |1⟩|b⟩)/√2`.
    pub fn ancilla_superposition(a: &StateVector, b: &StateVector) -> Result<StateVector> {
        if a.n_qubits != b.n_qubits {
            return Err(structural("branch states differ in width"));
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let amps = a.amps.iter().chain(&b.amps).map(|v| v * s).collect();
        Ok(StateVector { n_qubits: a.n_qubits + 1, amps })
    }

    /// Splits a state with an ancilla on qubit 0 into its unnormalized
    /// `|0⟩` and `|1⟩` branches.
    pub fn ancilla_branches(&self) -> (Vec<C64>, Vec<C64>) {
        let half = self.dim() / 2;
        (self.amps[..half].to_vec(), self.amps[half..].to_vec())
    }

    /// Reduced 2×2 density matrix of qubit 0, row-major.
    pub fn reduced_qubit0(&self) -> [C64; 4] {
        let (b0, b1) = self.ancilla_branches();
        [
            linalg::inner(&b0, &b0),
            linalg::inner(&b1, &b0),
            linalg::inner(&b0, &b1),
            linalg::inner(&b1, &b1),
        ]
    }

    pub fn check_norm(&self) -> Result<()> {
        let n = self.norm();
        if (n - 1.0).abs() > TOL.norm * (self.dim() as f64).sqrt().max(1.0) {
            return Err(validation(format!("state norm drifted to {n}")));
        }
        Ok(())
    }
}

fn check_width(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_QUBITS {
        return Err(crate::Error::Capacity(format!(
            "{n_qubits} qubits exceeds the dense backend cap of {MAX_QUBITS}"
        )));
    }
    Ok(())
}
