//! Gradients of the loss with respect to rotation angles.
//!
//! Exact pathways (parameter shift, finite differences, expectation of the
//! ancilla observable on the feature state) and the shot-based estimator that
//! charges communication for every state copy it consumes.

mod observables;

pub use observables::{GradObservable, GradObservableKind, LowerBlock};

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::presets::preset_cos;
use crate::circuits::ModelSpec;
use crate::error::{validation, Error, Result};
use crate::protocol::{self, charge_passes, CommLedger, FeatureStateRequest};
use crate::statevec::{draw_pm, UnitarySpec};
use crate::tolerance::ceil_robust;

/// `⟨E⟩ = C_E · ∂ℒ/∂θ` on the feature state.
pub const C_E: f64 = 0.5;
/// `β · ⟨Ê⟩ = C_E_HAT · ∂ℒ/∂θ` on the feature state.
pub const C_E_HAT: f64 = -1.0;
/// `⟨Ẽ⟩ = C_E_TILDE · ∂ℒ/∂θ` on `|+⟩|μ_L⟩`.
pub const C_E_TILDE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GradValues {
    Dense { values: Vec<f64> },
    Sparse { slot: usize, value: f64, len: usize },
}

impl GradValues {
    pub fn to_dense(&self) -> Vec<f64> {
        match self {
            GradValues::Dense { values } => values.clone(),
            GradValues::Sparse { slot, value, len } => {
                let mut v = vec![0.0; *len];
                v[*slot] = *value;
                v
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    ExactShift,
    FiniteDiff { h: f64 },
    ExpectationE,
    Shots { count: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientEstimate {
    pub values: GradValues,
    pub provenance: Provenance,
    pub ledger: CommLedger,
}

impl GradientEstimate {
    pub fn dense(&self) -> Vec<f64> {
        self.values.to_dense()
    }
}

fn check_params(model: &ModelSpec, params: &[f64]) -> Result<()> {
    model.validate()?;
    if params.len() != model.n_params() {
        return Err(validation(format!("expected {} parameters, got {}", model.n_params(), params.len())));
    }
    Ok(())
}

/// Coefficient of the rotation bound to `slot`.
fn slot_coefficient(model: &ModelSpec, slot: usize) -> Result<f64> {
    match model.placed_gates()[model.slot_position(slot)?].gate {
        UnitarySpec::PauliRotation { coefficient, .. } => Ok(*coefficient),
        _ => Err(Error::UnsupportedSlot(slot)),
    }
}

/// `∂ℒ/∂θ = (β/2)(ℒ(θ + π/(2β)) − ℒ(θ − π/(2β)))`, exact for `exp(−½iβθ𝒫)`.
pub fn grad_param_shift(model: &ModelSpec, params: &[f64], x: &[f64]) -> Result<GradientEstimate> {
    check_params(model, params)?;
    let mut values = Vec::with_capacity(params.len());
    let mut p = params.to_vec();
    for slot in 0..params.len() {
        let beta = slot_coefficient(model, slot)?;
        if beta == 0.0 {
            values.push(0.0);
            continue;
        }
        let s = PI / (2.0 * beta);
        p[slot] = params[slot] + s;
        let plus = model.loss_unchecked(&p, x)?;
        p[slot] = params[slot] - s;
        let minus = model.loss_unchecked(&p, x)?;
        p[slot] = params[slot];
        values.push(0.5 * beta * (plus - minus));
    }
    Ok(GradientEstimate { values: GradValues::Dense { values }, provenance: Provenance::ExactShift, ledger: CommLedger::new() })
}

/// Central differences of the exact loss.
pub fn grad_finite_diff(model: &ModelSpec, params: &[f64], x: &[f64], h: f64) -> Result<GradientEstimate> {
    if !(h > 0.0) {
        return Err(validation("finite-difference step must be positive"));
    }
    check_params(model, params)?;
    let mut p = params.to_vec();
    let mut values = Vec::with_capacity(params.len());
    for slot in 0..params.len() {
        p[slot] = params[slot] + h;
        let plus = model.loss_unchecked(&p, x)?;
        p[slot] = params[slot] - h;
        let minus = model.loss_unchecked(&p, x)?;
        p[slot] = params[slot];
        values.push((plus - minus) / (2.0 * h));
    }
    Ok(GradientEstimate { values: GradValues::Dense { values }, provenance: Provenance::FiniteDiff { h }, ledger: CommLedger::new() })
}

/// `⟨ψ|E|ψ⟩` on the feature state of `slot`; one copy is charged.
pub fn expectation_e(model: &ModelSpec, params: &[f64], x: &[f64], slot: usize) -> Result<(f64, CommLedger)> {
    check_params(model, params)?;
    let obs = GradObservable::e(model, slot)?;
    let (state, ledger) = protocol::prepare_feature_state(model, params, x, obs.target, 1)?;
    Ok((obs.expectation(&state)?, ledger))
}

/// All slots' `⟨E⟩ / C_E` as a dense gradient.
pub fn grad_expectation_e(model: &ModelSpec, params: &[f64], x: &[f64]) -> Result<GradientEstimate> {
    check_params(model, params)?;
    let mut ledger = CommLedger::new();
    let mut values = Vec::with_capacity(params.len());
    for slot in 0..params.len() {
        let (v, l) = expectation_e(model, params, x, slot)?;
        values.push(v / C_E);
        ledger.merge(&l);
    }
    Ok(GradientEstimate { values: GradValues::Dense { values }, provenance: Provenance::ExpectationE, ledger })
}

/// `⟨+, μ_L|Ẽ|+, μ_L⟩` for a last-layer `A` slot.
pub fn expectation_e_tilde(model: &ModelSpec, params: &[f64], x: &[f64], slot: usize) -> Result<f64> {
    check_params(model, params)?;
    let obs = fine_tune_observable(model, params, x, slot)?;
    let (state, _) = protocol::prepare_last_layer_state(model, params, x, 1)?;
    obs.expectation(&state)
}

pub fn fine_tune_observable(model: &ModelSpec, params: &[f64], x: &[f64], slot: usize) -> Result<GradObservable> {
    GradObservable::e_tilde(model, params, x, slot)
}

/// Measures the ratio `observable / (∂ℒ/∂θ)` on the one-qubit `cos θ`
/// model at several angles and snaps it to the nearest of
/// `{±½, ±1, ±2}`. Used by tests to pin the `C_*` constants.
pub fn calibrate(kind: GradObservableKind) -> Result<f64> {
    let model = preset_cos(2)?;
    let mut ratios = Vec::new();
    for theta in [0.4, 1.1, 2.3, -0.7] {
        let fd = grad_finite_diff(&model, &[theta], &[], 1e-5)?.dense()[0];
        let v = match kind {
            GradObservableKind::E => expectation_e(&model, &[theta], &[], 0)?.0,
            GradObservableKind::EHat => {
                let obs = GradObservable::e_hat(&model, 0)?;
                let (state, _) = protocol::prepare_feature_state(&model, &[theta], &[], obs.target, 1)?;
                obs.coefficient * obs.expectation(&state)?
            }
            GradObservableKind::ETilde => expectation_e_tilde(&model, &[theta], &[], 0)?,
        };
        ratios.push(v / fd);
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let candidates = [0.5, -0.5, 1.0, -1.0, 2.0, -2.0];
    Ok(candidates
        .into_iter()
        .min_by(|a, b| (a - mean).abs().total_cmp(&(b - mean).abs()))
        .expect("non-empty"))
}

/// Outcome of [`estimate_grad_budget`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetEstimate {
    pub estimate: GradientEstimate,
    pub shots_per_entry: u64,
    pub k_theory: f64,
}

/// `⌈2 ln(2m/δ)/ε²⌉` for `m` gradient entries; with `m = 2PL` this is
/// `⌈2 ln(4PL/δ)/ε²⌉`.
pub fn hoeffding_shots(entries: usize, eps: f64, delta: f64) -> Result<u64> {
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(validation("ε and δ must lie in (0, 1)"));
    }
    let m = entries.max(1) as f64;
    Ok(ceil_robust(2.0 * (2.0 * m / delta).ln() / (eps * eps)) as u64)
}

/// Copy count of the shadow-tomography bound with all constants set to one:
/// `⌈(log₂P)² log₂N′ ln(L/δ) / ε⁴⌉`.
pub fn shadow_copies_theory(p: usize, n_prime: usize, layers: usize, eps: f64, delta: f64) -> f64 {
    let lp = (p.max(1) as f64).log2();
    ceil_robust(lp * lp * (n_prime as f64).log2() * (layers as f64 / delta).ln() / eps.powi(4)).max(0.0)
}

/// Largest number of rotations in any single `A_ℓ` or `B_ℓ`.
pub fn rotations_per_unitary(model: &ModelSpec) -> usize {
    model
        .layers
        .iter()
        .flat_map(|l| [l.a_unitary.rotation_slots().len(), l.b_unitary.rotation_slots().len()])
        .max()
        .unwrap_or(0)
}

/// L∞-accurate gradient from ±1 samples of the normalized `E` observables.
///
/// Every slot gets `shots_per_entry` fresh feature-state copies; each copy
/// costs `2L` messages of `n + 1` qubits. With `|β| ≤ 1` the per-entry
/// Hoeffding bound and a union bound over all entries give
/// `‖g − ∇ℒ‖∞ ≤ ε` with probability at least `1 − δ`; larger `|β|` shrink
/// the per-sample accuracy target by `max|β|`.
pub fn estimate_grad_budget<R: Rng + ?Sized>(
    model: &ModelSpec,
    params: &[f64],
    x: &[f64],
    eps: f64,
    delta: f64,
    rng: &mut R,
) -> Result<BudgetEstimate> {
    check_params(model, params)?;
    let np = model.n_params();
    let beta = model.beta();
    let eps_eff = eps / beta.max_abs().max(1.0);
    let shots = hoeffding_shots(np, eps_eff, delta)?;
    let mut ledger = CommLedger::new();
    let mut values = Vec::with_capacity(np);
    for slot in 0..np {
        let b = beta.entries[slot];
        let req = FeatureStateRequest::for_slot(model, slot)?;
        charge_passes(&mut ledger, model.n_layers(), model.n_qubits + 1, shots);
        if b == 0.0 {
            values.push(0.0);
            continue;
        }
        let obs = GradObservable::e(model, slot)?.normalized()?;
        let cut = model.gate_position(req.side, req.layer, req.gate_cut)?;
        let state = protocol::feature_state_at(model, params, x, cut)?;
        let e = obs.expectation(&state)?;
        let draws = draw_pm(e, shots as usize, rng);
        let mean = draws.iter().map(|&m| f64::from(m)).sum::<f64>() / shots as f64;
        values.push(b.abs() * mean);
    }
    let k_theory = shadow_copies_theory(rotations_per_unitary(model), model.dim(), model.n_layers(), eps, delta);
    ledger.set_counter("k_theory", k_theory);
    Ok(BudgetEstimate {
        estimate: GradientEstimate {
            values: GradValues::Dense { values },
            provenance: Provenance::Shots { count: shots * np as u64 },
            ledger,
        },
        shots_per_entry: shots,
        k_theory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::presets::preset_smooth;
    use crate::circuits::{DataEncoderSpec, Layer, ParamSlot, Side};
    use crate::rng::seeded;
    use crate::statevec::{Pauli, PauliString};

    #[test]
    fn shift_on_cos_model() {
        let m = preset_cos(1).unwrap();
        let g = grad_param_shift(&m, &[PI / 3.0], &[]).unwrap().dense()[0];
        assert!((g + 3f64.sqrt() / 2.0).abs() < 1e-12);
        let g0 = grad_param_shift(&m, &[0.0], &[]).unwrap().dense()[0];
        assert!(g0.abs() < 1e-9);
    }

    #[test]
    fn finite_diff_is_second_order() {
        let m = preset_cos(1).unwrap();
        let t = 0.8;
        let err = |h: f64| (grad_finite_diff(&m, &[t], &[], h).unwrap().dense()[0] + t.sin()).abs();
        let ratio = err(1e-2) / err(5e-3);
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
        assert!(grad_finite_diff(&m, &[0.0], &[], 1e-4).unwrap().dense()[0].abs() < 1e-8);
        assert!(grad_finite_diff(&m, &[0.0], &[], 0.0).is_err());
    }

    #[test]
    fn calibration_constants_are_pinned() {
        assert_eq!(calibrate(GradObservableKind::E).unwrap(), C_E);
        assert_eq!(calibrate(GradObservableKind::EHat).unwrap(), C_E_HAT);
        assert_eq!(calibrate(GradObservableKind::ETilde).unwrap(), C_E_TILDE);
    }

    #[test]
    fn identity_circuit_gives_zero_e() {
        let m = ModelSpec {
            n_qubits: 1,
            layers: vec![Layer {
                b_unitary: UnitarySpec::identity(),
                a_unitary: UnitarySpec::Sequence {
                    gates: vec![UnitarySpec::PauliRotation { pauli: "Z".parse().unwrap(), coefficient: 1.0, slot: 0 }],
                },
            }],
            encoder: DataEncoderSpec::FixedBasis { index: 0 },
            loss_obs: PauliString::single(1, 0, Pauli::Z),
            param_layout: vec![ParamSlot { side: Side::A, layer: 0, index: 0, coefficient: 1.0 }],
        };
        let (v, ledger) = expectation_e(&m, &[0.7], &[], 0).unwrap();
        assert!(v.abs() < 1e-15);
        assert_eq!(ledger.quantum_messages, 2);
    }

    #[test]
    fn e_tilde_at_zero_angle_is_zero() {
        let m = preset_cos(3).unwrap();
        assert!(expectation_e_tilde(&m, &[0.0], &[], 0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn hoeffding_example() {
        // 2PL = 16 entries for P = 4, L = 2
        assert_eq!(hoeffding_shots(16, 0.1, 0.05).unwrap(), 1293);
        assert!(hoeffding_shots(16, 0.0, 0.05).is_err());
    }

    #[test]
    fn budget_ledger_closed_form() {
        let mut rng = seeded(14);
        let (m, _) = preset_smooth(3, 2, 4, &mut rng).unwrap();
        let params = vec![0.2; m.n_params()];
        let x = [0.5, 0.0, 0.5, 0.0, 0.5, 0.0, 0.5, 0.0];
        let b = estimate_grad_budget(&m, &params, &x, 0.1, 0.05, &mut rng).unwrap();
        assert_eq!(b.shots_per_entry, 1293);
        // shots · P · 2 sides · L layers · 2L messages · (n+1) qubits
        assert_eq!(b.estimate.ledger.qubits_sent, 1293 * 4 * 2 * 2 * 4 * 4);
        assert_eq!(b.estimate.ledger.quantum_messages, 1293 * 16 * 4);
        assert_eq!(b.k_theory, shadow_copies_theory(4, 8, 2, 0.1, 0.05));
    }

    #[test]
    fn budget_on_constant_circuit_is_near_zero() {
        let m = ModelSpec {
            n_qubits: 2,
            layers: vec![Layer {
                b_unitary: UnitarySpec::identity(),
                a_unitary: UnitarySpec::Sequence {
                    gates: vec![UnitarySpec::PauliRotation { pauli: "ZI".parse().unwrap(), coefficient: 0.8, slot: 0 }],
                },
            }],
            encoder: DataEncoderSpec::Amplitude,
            loss_obs: PauliString::single(2, 0, Pauli::Z),
            param_layout: vec![ParamSlot { side: Side::A, layer: 0, index: 0, coefficient: 0.8 }],
        };
        let b = estimate_grad_budget(&m, &[0.3], &[0.5, 0.5, 0.5, 0.5], 0.1, 0.05, &mut seeded(3)).unwrap();
        assert!(b.estimate.dense()[0].abs() <= 0.1);
    }
}
