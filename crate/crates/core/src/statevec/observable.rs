use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{PauliString, StateVector};
use crate::error::{structural, validation, Result};
use crate::linalg::{self, CMat};
use crate::tolerance::TOL;

/// Hermitian operator on a full register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Observable {
    Pauli(PauliString),
    Matrix(CMat),
}

impl Observable {
    pub fn n_qubits(&self) -> usize {
        match self {
            Observable::Pauli(p) => p.n_qubits(),
            Observable::Matrix(m) => m.dim.trailing_zeros() as usize,
        }
    }

    pub fn to_matrix(&self) -> CMat {
        match self {
            Observable::Pauli(p) => p.to_matrix(),
            Observable::Matrix(m) => m.clone(),
        }
    }

    fn check_against(&self, state: &StateVector) -> Result<()> {
        match self {
            Observable::Pauli(p) => p.check_width(state.n_qubits()),
            Observable::Matrix(m) => {
                m.check_square()?;
                if m.dim != state.dim() {
                    return Err(structural(format!("observable dim {} vs state dim {}", m.dim, state.dim())));
                }
                let err = m.hermitian_error();
                if err > TOL.hermitian {
                    return Err(validation(format!("observable is not Hermitian (error {err:.3e})")));
                }
                Ok(())
            }
        }
    }

    fn check_involution(&self) -> Result<()> {
        if let Observable::Matrix(m) = self {
            let err = m.involution_error();
            if err > TOL.involution {
                return Err(validation(format!("observable does not square to identity (error {err:.3e})")));
            }
        }
        Ok(())
    }
}

impl From<PauliString> for Observable {
    fn from(p: PauliString) -> Self {
        Observable::Pauli(p)
    }
}

/// `⟨ψ|O|ψ⟩`.
pub fn expectation(state: &StateVector, obs: &Observable) -> Result<f64> {
    obs.check_against(state)?;
    match obs {
        Observable::Pauli(p) => Ok(p.expectation_amps(state.amps())),
        Observable::Matrix(m) => {
            let v = linalg::inner(state.amps(), &m.matvec(state.amps()));
            if v.im.abs() > TOL.imag_residue {
                return Err(validation(format!("expectation has imaginary part {:.3e}", v.im)));
            }
            Ok(v.re)
        }
    }
}

/// One ±1 measurement outcome of an involutory observable.
pub fn sample_pm<R: Rng + ?Sized>(state: &StateVector, obs: &Observable, rng: &mut R) -> Result<i8> {
    Ok(sample_pm_many(state, obs, 1, rng)?[0])
}

/// `shots` independent ±1 outcomes on fresh copies of `state`.
pub fn sample_pm_many<R: Rng + ?Sized>(state: &StateVector, obs: &Observable, shots: usize, rng: &mut R) -> Result<Vec<i8>> {
    obs.check_involution()?;
    let e = expectation(state, obs)?;
    Ok(draw_pm(e, shots, rng))
}

/// ±1 draws with `P(+1) = (1 + e)/2`.
pub fn draw_pm<R: Rng + ?Sized>(e: f64, shots: usize, rng: &mut R) -> Vec<i8> {
    let p = (0.5 * (1.0 + e)).clamp(0.0, 1.0);
    (0..shots).map(|_| if rng.random::<f64>() < p { 1 } else { -1 }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::statevec::Pauli;
    use num_complex::Complex64 as C64;

    fn z0(n: usize) -> Observable {
        PauliString::single(n, 0, Pauli::Z).into()
    }

    fn plus() -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::from_real(&[h, h]).unwrap()
    }

    #[test]
    fn basic_expectations() {
        assert_eq!(expectation(&StateVector::zero(1).unwrap(), &z0(1)).unwrap(), 1.0);
        assert!(expectation(&plus(), &z0(1)).unwrap().abs() < 1e-15);
    }

    #[test]
    fn z0_matches_amplitude_partition() {
        let mut rng = seeded(5);
        let v: Vec<C64> = (0..8).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        let n = linalg::norm(&v);
        let s = StateVector::from_amplitudes(v.iter().map(|a| a / n).collect()).unwrap();
        let direct: f64 = s.amps()[..4].iter().map(|a| a.norm_sqr()).sum::<f64>()
            - s.amps()[4..].iter().map(|a| a.norm_sqr()).sum::<f64>();
        assert!((expectation(&s, &z0(3)).unwrap() - direct).abs() < 1e-14);
        let dense = Observable::Matrix(PauliString::single(3, 0, Pauli::Z).to_matrix());
        assert!((expectation(&s, &dense).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = CMat::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let err = expectation(&plus(), &Observable::Matrix(m)).unwrap_err();
        assert_eq!(err.code(), "validation");
    }

    #[test]
    fn non_involution_rejected() {
        let m = CMat::from_real_rows(&[vec![0.5, 0.0], vec![0.0, 1.0]]).unwrap();
        let mut rng = seeded(1);
        assert!(sample_pm(&plus(), &Observable::Matrix(m), &mut rng).is_err());
    }

    #[test]
    fn eigenstates_sample_deterministically() {
        let mut rng = seeded(2);
        let zero = StateVector::zero(1).unwrap();
        let x0: Observable = PauliString::single(1, 0, Pauli::X).into();
        for _ in 0..100 {
            assert_eq!(sample_pm(&zero, &z0(1), &mut rng).unwrap(), 1);
            assert_eq!(sample_pm(&plus(), &x0, &mut rng).unwrap(), 1);
        }
    }

    #[test]
    fn plus_state_z_frequency() {
        let mut rng = seeded(3);
        let draws = sample_pm_many(&plus(), &z0(1), 100_000, &mut rng).unwrap();
        let freq = draws.iter().filter(|&&m| m == 1).count() as f64 / 1e5;
        assert!((freq - 0.5).abs() <= 0.005, "freq {freq}");
    }

    #[test]
    fn sample_mean_tracks_expectation() {
        let mut rng = seeded(4);
        let s = StateVector::from_real(&[0.8, 0.6]).unwrap();
        let e = expectation(&s, &z0(1)).unwrap();
        let draws = sample_pm_many(&s, &z0(1), 100_000, &mut rng).unwrap();
        let mean = draws.iter().map(|&m| m as f64).sum::<f64>() / 1e5;
        assert!((mean - e).abs() < 8.0 / (1e5f64).sqrt());
    }

    #[test]
    fn same_seed_same_draws() {
        let a = sample_pm_many(&plus(), &z0(1), 64, &mut seeded(9)).unwrap();
        let b = sample_pm_many(&plus(), &z0(1), 64, &mut seeded(9)).unwrap();
        assert_eq!(a, b);
    }
}
