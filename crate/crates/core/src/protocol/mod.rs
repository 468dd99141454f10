//! Two-party execution of layered models.
//!
//! Alice owns the encoder and every `A_ℓ`; Bob owns every `B_ℓ`. The register
//! travels Alice → Bob before each `B_ℓ` and Bob → Alice before each `A_ℓ`, so
//! one pass through an `L`-layer circuit costs `2L` quantum messages.
//! Simulation happens in a single register; the ledger charges what the
//! physical protocol would send.

pub mod dataparallel;
mod ledger;

pub use dataparallel::dataparallel_prepare;
pub use ledger::{privacy_report, CommLedger, Message, Party, Payload, PrivacyReport, TraceEvent};

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::{ModelSpec, Side};
use crate::error::{validation, Result};
use crate::statevec::{self, StateVector, UnitarySpec};

/// Ownership of a model's pieces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub a_owner: Party,
    pub b_owner: Party,
    pub encoder_owner: Party,
}

impl Partition {
    /// Alice: `|ψ(x)⟩` and all `A_ℓ`; Bob: all `B_ℓ`. Fails if any `B_ℓ`
    /// reads the data, which Bob does not hold.
    pub fn standard(model: &ModelSpec) -> Result<Self> {
        model.validate()?;
        for (l, layer) in model.layers.iter().enumerate() {
            if reads_data(&layer.b_unitary) {
                return Err(validation(format!("B unitary of layer {l} depends on the data")));
            }
        }
        Ok(Self { a_owner: Party::Alice, b_owner: Party::Bob, encoder_owner: Party::Alice })
    }

    pub fn owner(&self, side: Side) -> Party {
        match side {
            Side::A => self.a_owner,
            Side::B => self.b_owner,
        }
    }
}

fn reads_data(u: &UnitarySpec) -> bool {
    match u {
        UnitarySpec::DataPhase { .. } => true,
        UnitarySpec::AncillaControlled { inner, .. } => reads_data(inner),
        UnitarySpec::Sequence { gates } => gates.iter().any(reads_data),
        _ => false,
    }
}

/// Charges `copies` passes of a register of `width` qubits through all `L`
/// layers (`2L` alternating messages, Alice first).
pub fn charge_passes(ledger: &mut CommLedger, layers: usize, width: usize, copies: u64) {
    ledger.send_relay(Party::Alice, 2 * layers, width as u64, copies);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InferenceOptions {
    pub shots: u64,
    /// Alice reports each outcome to Bob with one classical bit.
    pub share_result: bool,
    pub traced: bool,
}

impl InferenceOptions {
    pub fn shots(shots: u64) -> Self {
        Self { shots, share_result: false, traced: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceResult {
    pub estimate: f64,
    pub exact: f64,
    pub shots: u64,
    pub ledger: CommLedger,
}

/// Estimates `ℒ(Θ, x)` from `shots` ±1 measurements of `𝒫₀`, each on a
/// fresh pass through the circuit.
pub fn run_inference<R: Rng + ?Sized>(
    model: &ModelSpec,
    partition: &Partition,
    params: &[f64],
    x: &[f64],
    opts: InferenceOptions,
    rng: &mut R,
) -> Result<InferenceResult> {
    let InferenceOptions { shots, share_result, traced } = opts;
    if shots == 0 {
        return Err(validation("shots must be at least 1"));
    }
    let _ = partition;
    let phi = model.forward(params, x)?;
    let exact = model.loss_obs.expectation_amps(phi.amps());
    let draws = statevec::draw_pm(exact, shots as usize, rng);
    let estimate = draws.iter().map(|&m| f64::from(m)).sum::<f64>() / shots as f64;

    let mut ledger = if traced { CommLedger::traced() } else { CommLedger::new() };
    let width = model.n_qubits as u64;
    let mut pattern: Vec<Message> = (0..2 * model.n_layers())
        .map(|k| Message::quantum(if k % 2 == 0 { Party::Alice } else { Party::Bob }, width))
        .collect();
    if share_result {
        pattern.push(Message::classical(Party::Alice, 1));
    }
    ledger.send_pattern(&pattern, shots);
    Ok(InferenceResult { estimate, exact, shots, ledger })
}

/// Cut point for a feature state: before gate `gate_cut` of the `side`
/// product in layer `layer` (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureStateRequest {
    pub side: Side,
    pub layer: usize,
    pub gate_cut: usize,
}

impl FeatureStateRequest {
    pub fn for_slot(model: &ModelSpec, slot: usize) -> Result<Self> {
        let ps = model
            .param_layout
            .get(slot)
            .ok_or_else(|| validation(format!("slot {slot} out of range")))?;
        Ok(Self { side: ps.side, layer: ps.layer, gate_cut: ps.index })
    }
}

/// `(|0⟩|μ⟩ + |1⟩|ν⟩)/√2` where `μ` is the forward state at the cut and
/// `ν = W†𝒫₀W|μ⟩` pulls the measured output back through the gates `W`
/// after the cut.
///
/// Built as one `(n+1)`-qubit circuit: `|+⟩|ψ(x)⟩`, the gates before the cut,
/// then `W`, `𝒫₀`, `W†` controlled on the ancilla (qubit 0). The ledger charges
/// `2L` messages of `n + 1` qubits per copy.
pub fn prepare_feature_state(
    model: &ModelSpec,
    params: &[f64],
    x: &[f64],
    req: FeatureStateRequest,
    copies: u64,
) -> Result<(StateVector, CommLedger)> {
    model.validate()?;
    if params.len() != model.n_params() {
        return Err(validation(format!("expected {} parameters, got {}", model.n_params(), params.len())));
    }
    let cut = model.gate_position(req.side, req.layer, req.gate_cut)?;
    let state = feature_state_at(model, params, x, cut)?;
    let mut ledger = CommLedger::new();
    charge_passes(&mut ledger, model.n_layers(), model.n_qubits + 1, copies);
    Ok((state, ledger))
}

/// Feature state for a cut at flattened gate position `cut` (no validation).
pub(crate) fn feature_state_at(model: &ModelSpec, params: &[f64], x: &[f64], cut: usize) -> Result<StateVector> {
    let n = model.n_qubits;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi = model.initial_state(x)?;
    let mut state = psi.prepend_qubit(C64::new(h, 0.0), C64::new(h, 0.0));
    let gates = model.placed_gates();
    for g in &gates[..cut] {
        statevec::apply_in_place(state.amps_mut(), n + 1, &g.gate.lifted(1), params, x)?;
    }
    let tail: Vec<UnitarySpec> = gates[cut..].iter().map(|g| g.gate.lifted(1)).collect();
    let mut inner = tail.clone();
    inner.push(UnitarySpec::Pauli { pauli: model.loss_obs.lifted(1) });
    inner.extend(tail.iter().rev().map(|g| g.adjoint()));
    let controlled = UnitarySpec::AncillaControlled {
        control: 0,
        control_value: 1,
        inner: Box::new(UnitarySpec::Sequence { gates: inner }),
    };
    statevec::apply_in_place(state.amps_mut(), n + 1, &controlled, params, x)?;
    Ok(state)
}

/// `|+⟩|μ_L⟩` with `μ_L` the state just before `A_L`; Alice attaches the
/// ancilla locally, so each copy costs `2L` messages of `n` qubits.
pub fn prepare_last_layer_state(model: &ModelSpec, params: &[f64], x: &[f64], copies: u64) -> Result<(StateVector, CommLedger)> {
    model.validate()?;
    let last = model.n_layers().checked_sub(1).ok_or_else(|| validation("model has no layers"))?;
    let cut = model.gate_position(Side::A, last, 0)?;
    let mut mu = model.initial_state(x)?;
    model.apply_gates(&mut mu, 0..cut, params, x)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let state = mu.prepend_qubit(C64::new(h, 0.0), C64::new(h, 0.0));
    let mut ledger = CommLedger::new();
    charge_passes(&mut ledger, model.n_layers(), model.n_qubits, copies);
    Ok((state, ledger))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::presets::{preset_cos, preset_smooth};
    use crate::circuits::{DataEncoderSpec, Layer};
    use crate::rng::seeded;
    use crate::statevec::{Pauli, PauliString};

    fn identity_model(n: usize, layers: usize) -> ModelSpec {
        ModelSpec {
            n_qubits: n,
            layers: (0..layers)
                .map(|_| Layer { b_unitary: UnitarySpec::identity(), a_unitary: UnitarySpec::identity() })
                .collect(),
            encoder: DataEncoderSpec::FixedBasis { index: 0 },
            loss_obs: PauliString::single(n, 0, Pauli::Z),
            param_layout: vec![],
        }
    }

    #[test]
    fn inference_ledger_closed_form() {
        let m = identity_model(4, 3);
        let p = Partition::standard(&m).unwrap();
        let r = run_inference(&m, &p, &[], &[], InferenceOptions::shots(100), &mut seeded(1)).unwrap();
        assert_eq!(r.ledger.qubits_sent, 2400);
        assert_eq!(r.ledger.quantum_messages, 600);
        assert_eq!(r.estimate, 1.0);
        let shared = run_inference(&m, &p, &[], &[], InferenceOptions { shots: 100, share_result: true, traced: false }, &mut seeded(1)).unwrap();
        assert_eq!(shared.ledger.classical_bits, 100);
        assert_eq!(privacy_report(&shared.ledger).bits_bound, 2500);
    }

    #[test]
    fn inference_trace_counts_messages() {
        let m = identity_model(4, 3);
        let p = Partition::standard(&m).unwrap();
        let r = run_inference(&m, &p, &[], &[], InferenceOptions { shots: 100, share_result: false, traced: true }, &mut seeded(1)).unwrap();
        let from_trace: u64 = r.ledger.trace().iter().map(|e| e.width * e.repeat).sum();
        assert_eq!(from_trace, 2400);
    }

    #[test]
    fn data_dependent_b_rejected() {
        let mut m = identity_model(1, 1);
        m.layers[0].b_unitary = UnitarySpec::DataPhase { qubits: vec![0], rates: vec![0.0, 1.0], inputs: vec![0, 0] };
        assert!(Partition::standard(&m).is_err());
    }

    #[test]
    fn identity_feature_state_is_product() {
        let m = identity_model(1, 1);
        let (s, ledger) = prepare_feature_state(&m, &[], &[], FeatureStateRequest { side: Side::A, layer: 0, gate_cut: 0 }, 1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amps()[0] - C64::new(h, 0.0)).norm() < 1e-15);
        assert!((s.amps()[2] - C64::new(h, 0.0)).norm() < 1e-15);
        assert_eq!(ledger.quantum_messages, 2);
        assert_eq!(ledger.qubits_sent, 4);
    }

    #[test]
    fn feature_state_norm_and_cut_range() {
        let mut rng = seeded(7);
        let (m, _) = preset_smooth(3, 2, 3, &mut rng).unwrap();
        let params: Vec<f64> = (0..m.n_params()).map(|i| 0.1 * i as f64).collect();
        let x = [0.5, 0.5, 0.5, 0.5, 0.0, 0.0, 0.0, 0.0];
        for slot in 0..m.n_params() {
            let req = FeatureStateRequest::for_slot(&m, slot).unwrap();
            let (s, _) = prepare_feature_state(&m, &params, &x, req, 1).unwrap();
            assert!((s.norm() - 1.0).abs() < 1e-12);
        }
        let bad = FeatureStateRequest { side: Side::A, layer: 0, gate_cut: 4 };
        assert_eq!(prepare_feature_state(&m, &params, &x, bad, 1).unwrap_err().code(), "validation");
    }

    #[test]
    fn last_layer_state_of_cos_model() {
        let m = preset_cos(3).unwrap();
        let (s, ledger) = prepare_last_layer_state(&m, &[0.3], &[], 5).unwrap();
        assert_eq!(s.n_qubits(), 2);
        assert_eq!(ledger.quantum_messages, 30);
        assert_eq!(ledger.qubits_sent, 30);
    }
}
