//! Ancilla observables whose expectations on feature states are gradients.
//!
//! All three act on `(n+1)`-qubit states `|0⟩|a⟩ + |1⟩|b⟩` (ancilla = qubit 0)
//! as the block operator `[[0, M†], [M, 0]]`, so `⟨O⟩ = 2 Re⟨b|M|a⟩`:
//!
//! * `E`: `M = −½iβ𝒫` on the feature state `(|0⟩|μ⟩ + |1⟩|ν⟩)/√2`.
//! * `Ê`: `M = i𝒫`, same state; eigenvalues ±1.
//! * `Ẽ`: `M = A_L†𝒫₀ ∂A_L` on `|+⟩|μ_L⟩`, for slots of the last `A` layer.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::circuits::{ModelSpec, Side};
use crate::error::{validation, Error, Result};
use crate::linalg::{self, CMat};
use crate::protocol::FeatureStateRequest;
use crate::statevec::{PauliString, StateVector, UnitarySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradObservableKind {
    E,
    EHat,
    ETilde,
}

/// Lower-left block `M` of the ancilla observable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LowerBlock {
    ScaledPauli { scale: C64, pauli: PauliString },
    Dense { matrix: CMat },
}

impl LowerBlock {
    fn apply(&self, v: &[C64]) -> Vec<C64> {
        match self {
            LowerBlock::ScaledPauli { scale, pauli } => pauli.apply_vec(v).into_iter().map(|z| z * scale).collect(),
            LowerBlock::Dense { matrix } => matrix.matvec(v),
        }
    }

    fn to_matrix(&self) -> CMat {
        match self {
            LowerBlock::ScaledPauli { scale, pauli } => pauli.to_matrix().scale(*scale),
            LowerBlock::Dense { matrix } => matrix.clone(),
        }
    }

    fn scaled(&self, s: f64) -> LowerBlock {
        match self {
            LowerBlock::ScaledPauli { scale, pauli } => LowerBlock::ScaledPauli { scale: scale * s, pauli: pauli.clone() },
            LowerBlock::Dense { matrix } => LowerBlock::Dense { matrix: matrix.scale(C64::new(s, 0.0)) },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradObservable {
    pub kind: GradObservableKind,
    pub slot: usize,
    pub target: FeatureStateRequest,
    /// The rotation generator `𝒫` of the slot.
    pub pauli: PauliString,
    pub coefficient: f64,
    pub lower: LowerBlock,
    /// Whether the operator squares to the identity (±1 outcomes).
    pub involution: bool,
}

fn rotation_of(model: &ModelSpec, slot: usize) -> Result<(FeatureStateRequest, PauliString, f64)> {
    let req = FeatureStateRequest::for_slot(model, slot)?;
    let pos = model.slot_position(slot)?;
    match model.placed_gates()[pos].gate {
        UnitarySpec::PauliRotation { pauli, coefficient, .. } => Ok((req, pauli.clone(), *coefficient)),
        _ => Err(Error::UnsupportedSlot(slot)),
    }
}

impl GradObservable {
    /// `E` with lower block `−½iβ𝒫`.
    pub fn e(model: &ModelSpec, slot: usize) -> Result<Self> {
        let (target, pauli, beta) = rotation_of(model, slot)?;
        Ok(Self {
            kind: GradObservableKind::E,
            slot,
            target,
            lower: LowerBlock::ScaledPauli { scale: C64::new(0.0, -0.5 * beta), pauli: pauli.clone() },
            pauli,
            coefficient: beta,
            involution: false,
        })
    }

    /// `Ê` with lower block `i𝒫`.
    pub fn e_hat(model: &ModelSpec, slot: usize) -> Result<Self> {
        let (target, pauli, beta) = rotation_of(model, slot)?;
        Ok(Self {
            kind: GradObservableKind::EHat,
            slot,
            target,
            lower: LowerBlock::ScaledPauli { scale: C64::new(0.0, 1.0), pauli: pauli.clone() },
            pauli,
            coefficient: beta,
            involution: true,
        })
    }

    /// `Ẽ` for a slot of the last `A` layer, with all other layers frozen.
    pub fn e_tilde(model: &ModelSpec, params: &[f64], x: &[f64], slot: usize) -> Result<Self> {
        let (target, pauli, beta) = rotation_of(model, slot)?;
        let last = model.n_layers() - 1;
        if target.side != Side::A || target.layer != last {
            return Err(validation(format!("slot {slot} is not in the last A layer")));
        }
        let n = model.n_qubits;
        let gates: Vec<UnitarySpec> = model.layers[last].a_unitary.flatten().into_iter().cloned().collect();
        let i = target.gate_cut;
        let before = UnitarySpec::Sequence { gates: gates[..=i].to_vec() };
        let after = UnitarySpec::Sequence { gates: gates[i + 1..].to_vec() };
        let a_full = UnitarySpec::Sequence { gates: gates.clone() }.matrix(n, params, x)?;
        let d = pauli.to_matrix().scale(C64::new(0.0, -0.5 * beta));
        let da = after.matrix(n, params, x)?.mul(&d).mul(&before.matrix(n, params, x)?);
        let m = a_full.adjoint().mul(&model.loss_obs.to_matrix()).mul(&da);
        Ok(Self {
            kind: GradObservableKind::ETilde,
            slot,
            target,
            pauli,
            coefficient: beta,
            lower: LowerBlock::Dense { matrix: m },
            involution: false,
        })
    }

    /// Rescales `E` and `Ẽ` by `2/|β|` so their outcomes are ±1
    /// (`Ê` is returned unchanged). Fails for `β = 0`.
    pub fn normalized(&self) -> Result<Self> {
        if self.involution {
            return Ok(self.clone());
        }
        if self.coefficient == 0.0 {
            return Err(validation("cannot normalize the observable of a zero-coefficient slot"));
        }
        Ok(Self { lower: self.lower.scaled(2.0 / self.coefficient.abs()), involution: true, ..self.clone() })
    }

    /// `⟨ψ|O|ψ⟩ = 2 Re⟨b|M|a⟩`.
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        if state.n_qubits() != self.pauli.n_qubits() + 1 {
            return Err(validation("observable expects an (n+1)-qubit ancilla state"));
        }
        let (a, b) = state.ancilla_branches();
        Ok(2.0 * linalg::inner(&b, &self.lower.apply(&a)).re)
    }

    /// Dense `(n+1)`-qubit form `[[0, M†], [M, 0]]`.
    pub fn to_matrix(&self) -> CMat {
        let m = self.lower.to_matrix();
        let d = m.dim;
        let mut out = CMat::zeros(2 * d);
        for r in 0..d {
            for c in 0..d {
                out.set(d + r, c, m.get(r, c));
                out.set(c, d + r, m.get(r, c).conj());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::presets::preset_smooth;
    use crate::rng::seeded;

    #[test]
    fn hermitian_and_involution_properties() {
        let mut rng = seeded(8);
        let (m, _) = preset_smooth(2, 2, 2, &mut rng).unwrap();
        let params: Vec<f64> = (0..m.n_params()).map(|i| 0.3 * i as f64 - 0.5).collect();
        let x = [0.5; 4];
        for slot in 0..m.n_params() {
            let e = GradObservable::e(&m, slot).unwrap();
            assert!(e.to_matrix().hermitian_error() < 1e-10);
            let eh = GradObservable::e_hat(&m, slot).unwrap().to_matrix();
            assert!(eh.hermitian_error() < 1e-10);
            assert!(eh.involution_error() < 1e-10);
            assert!(e.normalized().unwrap().to_matrix().involution_error() < 1e-10);
        }
        for slot in m.slots_of(Side::A).into_iter().filter(|&s| m.param_layout[s].layer == 1) {
            let t = GradObservable::e_tilde(&m, &params, &x, slot).unwrap();
            assert!(t.to_matrix().hermitian_error() < 1e-10);
            assert!(t.normalized().unwrap().to_matrix().involution_error() < 1e-10);
        }
        assert!(GradObservable::e_tilde(&m, &params, &x, 0).is_err());
    }

    #[test]
    fn expectation_matches_dense_form() {
        let mut rng = seeded(9);
        let (m, _) = preset_smooth(2, 1, 2, &mut rng).unwrap();
        let v: Vec<C64> = (0..8).map(|k| C64::new((k as f64).sin(), (k as f64 * 0.7).cos())).collect();
        let nv = linalg::norm(&v);
        let s = StateVector::from_amplitudes(v.iter().map(|z| z / nv).collect()).unwrap();
        let e = GradObservable::e(&m, 1).unwrap();
        let dense = linalg::inner(s.amps(), &e.to_matrix().matvec(s.amps()));
        assert!((e.expectation(&s).unwrap() - dense.re).abs() < 1e-14);
        assert!(dense.im.abs() < 1e-14);
    }
}
