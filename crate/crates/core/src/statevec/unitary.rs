use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{PauliString, StateVector};
use crate::error::{structural, validation, Result};
use crate::linalg::{self, CMat};
use crate::tolerance::TOL;

/// A unitary acting on (a subset of) the register.
///
/// Local matrices act on the listed `qubits` with the first listed qubit as
/// the most significant bit of the local index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum UnitarySpec {
    /// `exp(−½ i β θ_slot P)`.
    PauliRotation { pauli: PauliString, coefficient: f64, slot: usize },
    /// A fixed Pauli string, used as a gate.
    Pauli { pauli: PauliString },
    DenseMatrix { qubits: Vec<usize>, matrix: CMat },
    /// `diag(e^{iφ_k})`.
    DiagonalPhase { qubits: Vec<usize>, phases: Vec<f64> },
    /// `diag(e^{−2πi rate_k x[input_k]})`, the data-dependent phase of Alice's layers.
    DataPhase { qubits: Vec<usize>, rates: Vec<f64>, inputs: Vec<usize> },
    /// `|k⟩ ↦ |map[k]⟩`.
    Permutation { qubits: Vec<usize>, map: Vec<usize> },
    /// `I − 2ww†/‖w‖²`.
    Householder { qubits: Vec<usize>, vector: Vec<C64> },
    /// `inner` applied on the subspace where `control` reads `control_value`.
    AncillaControlled { control: usize, control_value: u8, inner: Box<UnitarySpec> },
    /// Gates applied in order, element 0 first. Empty means identity.
    Sequence { gates: Vec<UnitarySpec> },
}

impl UnitarySpec {
    pub fn identity() -> Self {
        UnitarySpec::Sequence { gates: Vec::new() }
    }

    pub fn hadamard(q: usize) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        UnitarySpec::DenseMatrix {
            qubits: vec![q],
            matrix: CMat::from_real_rows(&[vec![s, s], vec![s, -s]]).expect("2x2"),
        }
    }

    pub fn swap(a: usize, b: usize) -> Self {
        UnitarySpec::Permutation { qubits: vec![a, b], map: vec![0, 2, 1, 3] }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            UnitarySpec::Sequence { gates } => gates.iter().all(|g| g.is_identity()),
            _ => false,
        }
    }

    /// `U†` as a spec. Rotation slots keep their slot with negated coefficient.
    pub fn adjoint(&self) -> UnitarySpec {
        use UnitarySpec::*;
        match self {
            PauliRotation { pauli, coefficient, slot } => {
                PauliRotation { pauli: pauli.clone(), coefficient: -coefficient, slot: *slot }
            }
            Pauli { .. } | Householder { .. } => self.clone(),
            DenseMatrix { qubits, matrix } => {
                DenseMatrix { qubits: qubits.clone(), matrix: matrix.adjoint() }
            }
            DiagonalPhase { qubits, phases } => DiagonalPhase {
                qubits: qubits.clone(),
                phases: phases.iter().map(|p| -p).collect(),
            },
            DataPhase { qubits, rates, inputs } => DataPhase {
                qubits: qubits.clone(),
                rates: rates.iter().map(|r| -r).collect(),
                inputs: inputs.clone(),
            },
            Permutation { qubits, map } => {
                let mut inv = vec![0; map.len()];
                for (k, &m) in map.iter().enumerate() {
                    inv[m] = k;
                }
                Permutation { qubits: qubits.clone(), map: inv }
            }
            AncillaControlled { control, control_value, inner } => AncillaControlled {
                control: *control,
                control_value: *control_value,
                inner: Box::new(inner.adjoint()),
            },
            Sequence { gates } => Sequence { gates: gates.iter().rev().map(|g| g.adjoint()).collect() },
        }
    }

    /// Same gate on a register with `k` extra qubits prepended.
    pub fn lifted(&self, k: usize) -> UnitarySpec {
        use UnitarySpec::*;
        let sh = |qs: &Vec<usize>| qs.iter().map(|q| q + k).collect::<Vec<_>>();
        match self {
            PauliRotation { pauli, coefficient, slot } => {
                PauliRotation { pauli: pauli.lifted(k), coefficient: *coefficient, slot: *slot }
            }
            Pauli { pauli } => Pauli { pauli: pauli.lifted(k) },
            DenseMatrix { qubits, matrix } => DenseMatrix { qubits: sh(qubits), matrix: matrix.clone() },
            DiagonalPhase { qubits, phases } => DiagonalPhase { qubits: sh(qubits), phases: phases.clone() },
            DataPhase { qubits, rates, inputs } => {
                DataPhase { qubits: sh(qubits), rates: rates.clone(), inputs: inputs.clone() }
            }
            Permutation { qubits, map } => Permutation { qubits: sh(qubits), map: map.clone() },
            Householder { qubits, vector } => Householder { qubits: sh(qubits), vector: vector.clone() },
            AncillaControlled { control, control_value, inner } => AncillaControlled {
                control: control + k,
                control_value: *control_value,
                inner: Box::new(inner.lifted(k)),
            },
            Sequence { gates } => Sequence { gates: gates.iter().map(|g| g.lifted(k)).collect() },
        }
    }

    /// Top-level gates of this unitary, flattening nested sequences.
    pub fn flatten(&self) -> Vec<&UnitarySpec> {
        match self {
            UnitarySpec::Sequence { gates } => gates.iter().flat_map(|g| g.flatten()).collect(),
            g => vec![g],
        }
    }

    /// `(slot, coefficient, pauli)` of every rotation, in application order.
    pub fn rotation_slots(&self) -> Vec<(usize, f64, &PauliString)> {
        let mut out = Vec::new();
        self.collect_slots(&mut out);
        out
    }

    fn collect_slots<'a>(&'a self, out: &mut Vec<(usize, f64, &'a PauliString)>) {
        match self {
            UnitarySpec::PauliRotation { pauli, coefficient, slot } => out.push((*slot, *coefficient, pauli)),
            UnitarySpec::AncillaControlled { inner, .. } => inner.collect_slots(out),
            UnitarySpec::Sequence { gates } => gates.iter().for_each(|g| g.collect_slots(out)),
            _ => {}
        }
    }

    /// Slots referenced inside something other than a top-level rotation
    /// (e.g. under a control); these cannot be trained.
    pub fn controlled_slots(&self) -> Vec<usize> {
        match self {
            UnitarySpec::AncillaControlled { inner, .. } => {
                inner.rotation_slots().into_iter().map(|(s, _, _)| s).collect()
            }
            UnitarySpec::Sequence { gates } => gates.iter().flat_map(|g| g.controlled_slots()).collect(),
            _ => Vec::new(),
        }
    }

    /// Qubits the gate may act on nontrivially.
    pub fn support(&self) -> BTreeSet<usize> {
        use UnitarySpec::*;
        match self {
            PauliRotation { pauli, .. } | Pauli { pauli } => pauli
                .labels()
                .iter()
                .enumerate()
                .filter(|(_, p)| **p != super::Pauli::I)
                .map(|(q, _)| q)
                .collect(),
            DenseMatrix { qubits, .. }
            | DiagonalPhase { qubits, .. }
            | DataPhase { qubits, .. }
            | Permutation { qubits, .. }
            | Householder { qubits, .. } => qubits.iter().copied().collect(),
            AncillaControlled { control, inner, .. } => {
                let mut s = inner.support();
                s.insert(*control);
                s
            }
            Sequence { gates } => gates.iter().flat_map(|g| g.support()).collect(),
        }
    }

    /// Checks the spec against a register of `n` qubits and `n_params` slots.
    pub fn validate(&self, n: usize, n_params: usize) -> Result<()> {
        use UnitarySpec::*;
        match self {
            PauliRotation { pauli, coefficient, slot } => {
                pauli.check_width(n)?;
                if !coefficient.is_finite() {
                    return Err(validation("rotation coefficient must be finite"));
                }
                if *slot >= n_params {
                    return Err(structural(format!("parameter slot {slot} out of range ({n_params} params)")));
                }
            }
            Pauli { pauli } => pauli.check_width(n)?,
            DenseMatrix { qubits, matrix } => {
                let d = check_qubits(qubits, n)?;
                matrix.check_square()?;
                if matrix.dim != d {
                    return Err(structural(format!("matrix dim {} does not match {} qubits", matrix.dim, qubits.len())));
                }
                let err = matrix.unitarity_error();
                if err > TOL.unitarity_reject {
                    return Err(validation(format!("dense matrix is not unitary (‖U†U−I‖ = {err:.3e})")));
                }
            }
            DiagonalPhase { qubits, phases } => {
                let d = check_qubits(qubits, n)?;
                check_len("phases", phases.len(), d)?;
            }
            DataPhase { qubits, rates, inputs } => {
                let d = check_qubits(qubits, n)?;
                check_len("rates", rates.len(), d)?;
                check_len("inputs", inputs.len(), d)?;
            }
            Permutation { qubits, map } => {
                let d = check_qubits(qubits, n)?;
                check_len("map", map.len(), d)?;
                let mut seen = vec![false; d];
                for &m in map {
                    if m >= d || std::mem::replace(&mut seen[m], true) {
                        return Err(validation("permutation map is not a bijection"));
                    }
                }
            }
            Householder { qubits, vector } => {
                let d = check_qubits(qubits, n)?;
                check_len("vector", vector.len(), d)?;
            }
            AncillaControlled { control, control_value, inner } => {
                if *control >= n {
                    return Err(structural(format!("control qubit {control} out of range")));
                }
                if *control_value > 1 {
                    return Err(validation("control value must be 0 or 1"));
                }
                if inner.support().contains(control) {
                    return Err(validation("controlled gate acts on its own control qubit"));
                }
                inner.validate(n, n_params)?;
            }
            Sequence { gates } => gates.iter().try_for_each(|g| g.validate(n, n_params))?,
        }
        Ok(())
    }

    /// Realized matrix on `n` qubits, built column by column.
    pub fn matrix(&self, n: usize, params: &[f64], data: &[f64]) -> Result<CMat> {
        let dim = 1usize << n;
        let mut m = CMat::zeros(dim);
        for c in 0..dim {
            let mut col = vec![C64::new(0.0, 0.0); dim];
            col[c] = C64::new(1.0, 0.0);
            apply_in_place(&mut col, n, self, params, data)?;
            for (r, v) in col.into_iter().enumerate() {
                m.set(r, c, v);
            }
        }
        Ok(m)
    }
}

fn check_qubits(qubits: &[usize], n: usize) -> Result<usize> {
    let mut seen = BTreeSet::new();
    for &q in qubits {
        if q >= n {
            return Err(structural(format!("qubit {q} out of range for {n}-qubit register")));
        }
        if !seen.insert(q) {
            return Err(structural(format!("qubit {q} listed twice")));
        }
    }
    Ok(1usize << qubits.len())
}

fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(structural(format!("{what} has length {got}, expected {want}")));
    }
    Ok(())
}

/// Global-index offsets of each local basis state of `qubits`.
fn local_offsets(qubits: &[usize], n: usize) -> (Vec<usize>, usize) {
    let m = qubits.len();
    let mut mask = 0usize;
    let offsets = (0..1usize << m)
        .map(|k| {
            let mut off = 0;
            for (pos, &q) in qubits.iter().enumerate() {
                if k >> (m - 1 - pos) & 1 == 1 {
                    off |= 1 << (n - 1 - q);
                }
            }
            off
        })
        .collect();
    for &q in qubits {
        mask |= 1 << (n - 1 - q);
    }
    (offsets, mask)
}

/// Calls `f(base)` for every global index with all `mask` bits clear.
fn for_each_base(dim: usize, mask: usize, mut f: impl FnMut(usize)) {
    for base in 0..dim {
        if base & mask == 0 {
            f(base);
        }
    }
}

fn apply_local(amps: &mut [C64], n: usize, qubits: &[usize], mut op: impl FnMut(&mut [C64])) {
    let (offsets, mask) = local_offsets(qubits, n);
    let mut buf = vec![C64::new(0.0, 0.0); offsets.len()];
    for_each_base(amps.len(), mask, |base| {
        for (b, off) in buf.iter_mut().zip(&offsets) {
            *b = amps[base | off];
        }
        op(&mut buf);
        for (b, off) in buf.iter().zip(&offsets) {
            amps[base | off] = *b;
        }
    });
}

fn apply_diag(amps: &mut [C64], n: usize, qubits: &[usize], diag: &[C64]) {
    let (offsets, mask) = local_offsets(qubits, n);
    for_each_base(amps.len(), mask, |base| {
        for (d, off) in diag.iter().zip(&offsets) {
            amps[base | off] *= d;
        }
    });
}

/// Applies `u` to raw amplitudes of an `n`-qubit register.
///
/// Assumes `u` has been validated; only parameter and data indices are
/// bounds-checked here.
pub fn apply_in_place(amps: &mut [C64], n: usize, u: &UnitarySpec, params: &[f64], data: &[f64]) -> Result<()> {
    use UnitarySpec::*;
    if amps.len() != 1usize << n {
        return Err(structural(format!("{} amplitudes for {n} qubits", amps.len())));
    }
    match u {
        PauliRotation { pauli, coefficient, slot } => {
            pauli.check_width(n)?;
            let theta = *params
                .get(*slot)
                .ok_or_else(|| structural(format!("missing parameter for slot {slot}")))?;
            pauli.rotate_in_place(amps, coefficient * theta);
        }
        Pauli { pauli } => {
            pauli.check_width(n)?;
            pauli.apply_in_place(amps);
        }
        DenseMatrix { qubits, matrix } => {
            apply_local(amps, n, qubits, |buf| {
                let out = matrix.matvec(buf);
                buf.copy_from_slice(&out);
            });
        }
        DiagonalPhase { qubits, phases } => {
            let diag: Vec<C64> = phases.iter().map(|&p| C64::from_polar(1.0, p)).collect();
            apply_diag(amps, n, qubits, &diag);
        }
        DataPhase { qubits, rates, inputs } => {
            let diag = inputs
                .iter()
                .zip(rates)
                .map(|(&i, &r)| {
                    let x = data
                        .get(i)
                        .ok_or_else(|| structural(format!("data phase reads input {i}, only {} given", data.len())))?;
                    Ok(C64::from_polar(1.0, -2.0 * PI * r * x))
                })
                .collect::<Result<Vec<_>>>()?;
            apply_diag(amps, n, qubits, &diag);
        }
        Permutation { qubits, map } => {
            apply_local(amps, n, qubits, |buf| {
                let src = buf.to_vec();
                for (k, &m) in map.iter().enumerate() {
                    buf[m] = src[k];
                }
            });
        }
        Householder { qubits, vector } => {
            let n2: f64 = vector.iter().map(|z| z.norm_sqr()).sum();
            if n2 > 1e-300 {
                apply_local(amps, n, qubits, |buf| {
                    let p = linalg::inner(vector, buf) * (2.0 / n2);
                    buf.iter_mut().zip(vector).for_each(|(b, w)| *b -= w * p);
                });
            }
        }
        AncillaControlled { control, control_value, inner } => {
            let mut work = amps.to_vec();
            apply_in_place(&mut work, n, inner, params, data)?;
            let bit = 1usize << (n - 1 - control);
            let want = if *control_value == 1 { bit } else { 0 };
            for (i, a) in amps.iter_mut().enumerate() {
                if i & bit == want {
                    *a = work[i];
                }
            }
        }
        Sequence { gates } => {
            for g in gates {
                apply_in_place(amps, n, g, params, data)?;
            }
        }
    }
    Ok(())
}

/// `U|ψ⟩` as a fresh state. Validates `u` first.
pub fn apply(state: &StateVector, u: &UnitarySpec, params: &[f64], data: &[f64]) -> Result<StateVector> {
    let n = state.n_qubits();
    u.validate(n, params.len())?;
    let mut amps = state.amps().to_vec();
    apply_in_place(&mut amps, n, u, params, data)?;
    Ok(StateVector::from_raw(n, amps))
}
