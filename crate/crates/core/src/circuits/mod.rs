//! Layered circuit models `|φ(Θ,x)⟩ = A_L B_L ⋯ A_1 B_1 |ψ(x)⟩`.
//!
//! A [`ModelSpec`] is plain data and round-trips through JSON, so the CLI can
//! load circuits from experiment files. Trainable parameters live in slots;
//! slot `s` is `param_layout[s]` and must be bound by exactly one top-level
//! [`UnitarySpec::PauliRotation`] in the layer and side it names.

pub mod presets;

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{structural, validation, Error, Result};
use crate::statevec::{self, PauliString, StateVector, UnitarySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::A => "A",
            Side::B => "B",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    pub b_unitary: UnitarySpec,
    pub a_unitary: UnitarySpec,
}

impl Layer {
    pub fn unitary(&self, side: Side) -> &UnitarySpec {
        match side {
            Side::A => &self.a_unitary,
            Side::B => &self.b_unitary,
        }
    }
}

/// Where a trainable parameter sits: side, layer (0-based), position inside
/// that unitary's gate product, and its rotation coefficient β.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSlot {
    pub side: Side,
    pub layer: usize,
    pub index: usize,
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataEncoderSpec {
    /// Amplitude encoding of the data vector itself.
    Amplitude,
    FixedBasis { index: usize },
    /// `|+⟩|0…0⟩`.
    PlusZero,
    /// Amplitude encoding of an `rows × cols` matrix given row-major; Alice
    /// holds the first `rows/2` rows, Bob the rest.
    DataParallel { rows: usize, cols: usize },
}

impl DataEncoderSpec {
    pub fn encode(&self, n_qubits: usize, x: &[f64]) -> Result<StateVector> {
        match self {
            DataEncoderSpec::Amplitude => {
                if x.len() != 1 << n_qubits {
                    return Err(validation(format!(
                        "amplitude encoder needs {} entries, got {}",
                        1usize << n_qubits,
                        x.len()
                    )));
                }
                StateVector::from_real(x)
            }
            DataEncoderSpec::FixedBasis { index } => {
                StateVector::basis(n_qubits, *index).map_err(|e| validation(e.to_string()))
            }
            DataEncoderSpec::PlusZero => {
                if n_qubits == 0 {
                    return Err(validation("plus_zero needs at least one qubit"));
                }
                let h = std::f64::consts::FRAC_1_SQRT_2;
                let rest = StateVector::zero(n_qubits - 1)?;
                Ok(rest.prepend_qubit(C64::new(h, 0.0), C64::new(h, 0.0)))
            }
            DataEncoderSpec::DataParallel { rows, cols } => {
                if rows * cols != 1 << n_qubits || x.len() != rows * cols {
                    return Err(validation("data-parallel encoder shape does not match register or data"));
                }
                StateVector::from_real(x)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub n_qubits: usize,
    pub layers: Vec<Layer>,
    pub encoder: DataEncoderSpec,
    pub loss_obs: PauliString,
    #[serde(default)]
    pub param_layout: Vec<ParamSlot>,
}

/// One gate of the flattened circuit together with its owner.
#[derive(Debug, Clone, Copy)]
pub struct PlacedGate<'a> {
    pub layer: usize,
    pub side: Side,
    /// Position inside its layer-side product.
    pub index: usize,
    pub gate: &'a UnitarySpec,
}

/// Coefficients `β` of every slot, aligned with `param_layout`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaVector {
    pub entries: Vec<f64>,
    pub norm1: f64,
}

impl BetaVector {
    pub fn from_layout(layout: &[ParamSlot]) -> Self {
        let entries: Vec<f64> = layout.iter().map(|s| s.coefficient).collect();
        let norm1 = entries.iter().map(|b| b.abs()).sum();
        Self { entries, norm1 }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, b| m.max(b.abs()))
    }
}

impl ModelSpec {
    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn n_params(&self) -> usize {
        self.param_layout.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn beta(&self) -> BetaVector {
        BetaVector::from_layout(&self.param_layout)
    }

    pub fn slots_of(&self, side: Side) -> Vec<usize> {
        (0..self.n_params()).filter(|&s| self.param_layout[s].side == side).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.loss_obs.check_width(self.n_qubits)?;
        let np = self.n_params();
        let mut bound: BTreeMap<usize, usize> = BTreeMap::new();
        for (l, layer) in self.layers.iter().enumerate() {
            for side in [Side::B, Side::A] {
                let u = layer.unitary(side);
                u.validate(self.n_qubits, np)?;
                if let Some(&s) = u.controlled_slots().first() {
                    return Err(Error::UnsupportedSlot(s));
                }
                for (idx, g) in u.flatten().into_iter().enumerate() {
                    if let UnitarySpec::PauliRotation { coefficient, slot, .. } = g {
                        *bound.entry(*slot).or_default() += 1;
                        let ps = &self.param_layout[*slot];
                        if ps.side != side || ps.layer != l || ps.index != idx {
                            return Err(validation(format!(
                                "slot {slot} is declared at ({}, layer {}, index {}) but bound at ({side}, layer {l}, index {idx})",
                                ps.side, ps.layer, ps.index
                            )));
                        }
                        if (ps.coefficient - coefficient).abs() > 1e-12 {
                            return Err(validation(format!("slot {slot} coefficient differs from its gate")));
                        }
                    }
                }
            }
        }
        for s in 0..np {
            match bound.get(&s) {
                Some(1) => {}
                Some(k) => return Err(validation(format!("slot {s} is bound {k} times"))),
                None => return Err(Error::UnsupportedSlot(s)),
            }
        }
        Ok(())
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(structural(format!("expected {} parameters, got {}", self.n_params(), params.len())));
        }
        Ok(())
    }

    /// All gates in application order: layer 0 B-gates, layer 0 A-gates, layer 1 ...
    pub fn placed_gates(&self) -> Vec<PlacedGate<'_>> {
        let mut out = Vec::new();
        for (l, layer) in self.layers.iter().enumerate() {
            for side in [Side::B, Side::A] {
                for (index, gate) in layer.unitary(side).flatten().into_iter().enumerate() {
                    out.push(PlacedGate { layer: l, side, index, gate });
                }
            }
        }
        out
    }

    /// Flattened position of the gate `index` of `(layer, side)`; `index` may
    /// equal the gate count (a cut after the last gate of that product).
    pub fn gate_position(&self, side: Side, layer: usize, index: usize) -> Result<usize> {
        if layer >= self.n_layers() {
            return Err(validation(format!("layer {layer} out of range")));
        }
        let mut pos = 0;
        for (l, lay) in self.layers.iter().enumerate() {
            for s in [Side::B, Side::A] {
                let count = lay.unitary(s).flatten().len();
                if l == layer && s == side {
                    if index > count {
                        return Err(validation(format!("gate cut {index} exceeds {count} gates")));
                    }
                    return Ok(pos + index);
                }
                pos += count;
            }
        }
        unreachable!("layer index checked above")
    }

    pub fn slot_position(&self, slot: usize) -> Result<usize> {
        let ps = self
            .param_layout
            .get(slot)
            .ok_or_else(|| validation(format!("slot {slot} out of range")))?;
        self.gate_position(ps.side, ps.layer, ps.index)
    }

    pub fn initial_state(&self, x: &[f64]) -> Result<StateVector> {
        self.encoder.encode(self.n_qubits, x)
    }

    /// Applies flattened gates `range` to `state`.
    pub fn apply_gates(&self, state: &mut StateVector, range: std::ops::Range<usize>, params: &[f64], x: &[f64]) -> Result<()> {
        let gates = self.placed_gates();
        for g in &gates[range] {
            statevec::apply_in_place(state.amps_mut(), self.n_qubits, g.gate, params, x)?;
        }
        Ok(())
    }

    /// Applies the adjoints of flattened gates `range`, last gate first.
    pub fn apply_gates_adjoint(&self, state: &mut StateVector, range: std::ops::Range<usize>, params: &[f64], x: &[f64]) -> Result<()> {
        let gates = self.placed_gates();
        for g in gates[range].iter().rev() {
            statevec::apply_in_place(state.amps_mut(), self.n_qubits, &g.gate.adjoint(), params, x)?;
        }
        Ok(())
    }

    pub fn n_gates(&self) -> usize {
        self.placed_gates().len()
    }

    /// `|φ(Θ,x)⟩`.
    pub fn forward(&self, params: &[f64], x: &[f64]) -> Result<StateVector> {
        self.validate()?;
        self.check_params(params)?;
        let mut state = self.initial_state(x)?;
        self.apply_gates(&mut state, 0..self.n_gates(), params, x)?;
        Ok(state)
    }

    /// `ℒ(Θ,x) = ⟨φ|𝒫₀|φ⟩`.
    pub fn loss(&self, params: &[f64], x: &[f64]) -> Result<f64> {
        let phi = self.forward(params, x)?;
        Ok(self.loss_obs.expectation_amps(phi.amps()))
    }

    /// Loss without re-validating the model; for hot loops after one
    /// validated call.
    pub fn loss_unchecked(&self, params: &[f64], x: &[f64]) -> Result<f64> {
        let mut state = self.initial_state(x)?;
        self.apply_gates(&mut state, 0..self.n_gates(), params, x)?;
        Ok(self.loss_obs.expectation_amps(state.amps()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::Pauli;

    fn identity_model(n: usize) -> ModelSpec {
        ModelSpec {
            n_qubits: n,
            layers: vec![Layer { b_unitary: UnitarySpec::identity(), a_unitary: UnitarySpec::identity() }],
            encoder: DataEncoderSpec::FixedBasis { index: 0 },
            loss_obs: PauliString::single(n, 0, Pauli::Z),
            param_layout: vec![],
        }
    }

    #[test]
    fn identity_circuit() {
        let m = identity_model(3);
        let phi = m.forward(&[], &[]).unwrap();
        assert_eq!(phi, StateVector::zero(3).unwrap());
        assert_eq!(m.loss(&[], &[]).unwrap(), 1.0);
    }

    #[test]
    fn b_acts_before_a() {
        // B = X on qubit 0, A = H on qubit 0: A·B|0⟩ = H|1⟩ = |−⟩, so ⟨X⟩ = −1.
        let mut m = identity_model(1);
        m.layers[0].b_unitary = UnitarySpec::Pauli { pauli: "X".parse().unwrap() };
        m.layers[0].a_unitary = UnitarySpec::hadamard(0);
        m.loss_obs = "X".parse().unwrap();
        assert!((m.loss(&[], &[]).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn layout_must_match_bindings() {
        let mut m = identity_model(1);
        m.layers[0].a_unitary = UnitarySpec::PauliRotation { pauli: "X".parse().unwrap(), coefficient: 1.0, slot: 0 };
        m.param_layout = vec![ParamSlot { side: Side::B, layer: 0, index: 0, coefficient: 1.0 }];
        assert!(m.validate().is_err());
        m.param_layout[0].side = Side::A;
        m.validate().unwrap();
        m.param_layout.push(ParamSlot { side: Side::A, layer: 0, index: 1, coefficient: 1.0 });
        assert_eq!(m.validate().unwrap_err().code(), "unsupported_slot");
    }

    #[test]
    fn controlled_slot_is_unsupported() {
        let mut m = identity_model(2);
        m.layers[0].a_unitary = UnitarySpec::AncillaControlled {
            control: 0,
            control_value: 1,
            inner: Box::new(UnitarySpec::PauliRotation { pauli: "IX".parse().unwrap(), coefficient: 1.0, slot: 0 }),
        };
        m.param_layout = vec![ParamSlot { side: Side::A, layer: 0, index: 0, coefficient: 1.0 }];
        assert_eq!(m.validate().unwrap_err().code(), "unsupported_slot");
    }

    #[test]
    fn encoder_mismatch_is_validation_error() {
        let mut m = identity_model(2);
        m.encoder = DataEncoderSpec::Amplitude;
        assert_eq!(m.loss(&[], &[1.0, 0.0]).unwrap_err().code(), "validation");
        m.encoder = DataEncoderSpec::FixedBasis { index: 9 };
        assert_eq!(m.loss(&[], &[]).unwrap_err().code(), "validation");
    }

    #[test]
    fn model_json_roundtrip() {
        let mut m = identity_model(2);
        m.layers[0].a_unitary = UnitarySpec::Sequence {
            gates: vec![UnitarySpec::PauliRotation { pauli: "XY".parse().unwrap(), coefficient: 0.5, slot: 0 }],
        };
        m.param_layout = vec![ParamSlot { side: Side::A, layer: 0, index: 0, coefficient: 0.5 }];
        let js = serde_json::to_string(&m).unwrap();
        let back: ModelSpec = serde_json::from_str(&js).unwrap();
        assert_eq!(back, m);
        assert!(js.contains("\"kind\":\"pauli_rotation\""));
    }
}
