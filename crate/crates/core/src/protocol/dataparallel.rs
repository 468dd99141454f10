//! Amplitude encoding of a matrix whose rows are split between the players.

use num_complex::Complex64 as C64;

use super::{CommLedger, Party};
use crate::error::{validation, Result};
use crate::linalg;
use crate::statevec::{self, StateVector, UnitarySpec};
use crate::tolerance::TOL;

/// Prepares the amplitude encoding of `[x_A; x_B]` (row-major, `cols`
/// columns, each player holding `N₁/2` rows) with one quantum message.
///
/// Alice encodes her rows and puts the weight `‖x_B‖_F` on the marker basis
/// state `|N₁/2, 0⟩`; Bob then applies the Householder reflection exchanging
/// the marker with `x_B/‖x_B‖_F` embedded in his rows. The reflection is
/// supported on Bob's rows only, so Alice's amplitudes are untouched.
pub fn dataparallel_prepare(x_a: &[f64], x_b: &[f64], cols: usize) -> Result<(StateVector, CommLedger)> {
    if cols == 0 || x_a.len() != x_b.len() || !x_a.len().is_multiple_of(cols) {
        return Err(validation("x_A and x_B must both be (N₁/2) × N₂ row-major blocks"));
    }
    let total = 2 * x_a.len();
    if !total.is_power_of_two() || !cols.is_power_of_two() {
        return Err(validation("N₁ and N₂ must be powers of two"));
    }
    let norm_a2: f64 = x_a.iter().map(|v| v * v).sum();
    let norm_b = linalg::real_norm(x_b);
    if ((norm_a2 + norm_b * norm_b).sqrt() - 1.0).abs() > TOL.input_norm {
        return Err(validation("‖[x_A, x_B]‖_F must be 1"));
    }
    let marker = x_a.len();
    let mut alice = vec![C64::new(0.0, 0.0); total];
    for (a, &v) in alice.iter_mut().zip(x_a) {
        *a = C64::new(v, 0.0);
    }
    alice[marker] = C64::new(norm_b, 0.0);
    let n = total.trailing_zeros() as usize;
    let state = StateVector::from_amplitudes(alice)?;

    let mut ledger = CommLedger::new();
    ledger.send_qubits(Party::Alice, n as u64);

    if norm_b == 0.0 {
        return Ok((state, ledger));
    }
    let mut target = vec![C64::new(0.0, 0.0); total];
    for (t, &v) in target[marker..].iter_mut().zip(x_b) {
        *t = C64::new(v / norm_b, 0.0);
    }
    let mut e = vec![C64::new(0.0, 0.0); total];
    e[marker] = C64::new(1.0, 0.0);
    let (w, _) = linalg::householder_map(&e, &target);
    let bob = UnitarySpec::Householder { qubits: (0..n).collect(), vector: w };
    let out = statevec::apply(&state, &bob, &[], &[])?;
    Ok((out, ledger))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;

    #[test]
    fn random_split_matches_direct_encoding() {
        let mut rng = seeded(21);
        for _ in 0..20 {
            let v: Vec<f64> = (0..32).map(|_| rng.random::<f64>() - 0.5).collect();
            let nv = linalg::real_norm(&v);
            let v: Vec<f64> = v.iter().map(|a| a / nv).collect();
            let (s, ledger) = dataparallel_prepare(&v[..16], &v[16..], 4).unwrap();
            let direct = StateVector::from_real(&v).unwrap();
            assert!(s.fidelity(&direct) >= 1.0 - 1e-12);
            assert_eq!(ledger.quantum_messages, 1);
            assert_eq!(ledger.qubits_sent, 5);
        }
    }

    #[test]
    fn zero_bob_block_is_padding() {
        let x_a = [0.6, 0.8, 0.0, 0.0];
        let (s, _) = dataparallel_prepare(&x_a, &[0.0; 4], 2).unwrap();
        assert!((s.amps()[0].re - 0.6).abs() < 1e-15);
        assert!((s.amps()[1].re - 0.8).abs() < 1e-15);
        assert!(s.amps()[4..].iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn norm_violation_rejected() {
        assert_eq!(dataparallel_prepare(&[1.0, 0.0], &[1.0, 0.0], 2).unwrap_err().code(), "validation");
    }
}
