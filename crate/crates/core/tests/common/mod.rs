//! Dense-matrix reference simulator built from Kronecker products.
//!
//! Shares nothing with the library's state-vector kernels: every Pauli
//! rotation becomes an explicit `2ⁿ × 2ⁿ` matrix `cos(a/2)I − i sin(a/2)P`.
#![allow(dead_code)]

use distqml::circuits::{DataEncoderSpec, ModelSpec};
use distqml::statevec::UnitarySpec;
use distqml::C64;

pub type Mat = Vec<Vec<C64>>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub fn identity(d: usize) -> Mat {
    (0..d).map(|i| (0..d).map(|j| if i == j { ONE } else { ZERO }).collect()).collect()
}

fn pauli_2x2(c: char) -> Mat {
    match c {
        'I' => identity(2),
        'X' => vec![vec![ZERO, ONE], vec![ONE, ZERO]],
        'Y' => vec![vec![ZERO, -I], vec![I, ZERO]],
        'Z' => vec![vec![ONE, ZERO], vec![ZERO, -ONE]],
        other => panic!("not a Pauli label: {other}"),
    }
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![ZERO; ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// Leftmost label acts on qubit 0, the most significant bit.
pub fn pauli_matrix(labels: &str) -> Mat {
    labels.chars().fold(identity(1), |acc, c| kron(&acc, &pauli_2x2(c)))
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let d = a.len();
    (0..d).map(|i| (0..d).map(|j| (0..d).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

pub fn matvec(a: &Mat, v: &[C64]) -> Vec<C64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

pub fn adjoint(a: &Mat) -> Mat {
    let d = a.len();
    (0..d).map(|i| (0..d).map(|j| a[j][i].conj()).collect()).collect()
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn rotation(labels: &str, angle: f64) -> Mat {
    let p = pauli_matrix(labels);
    let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
    (0..p.len())
        .map(|i| (0..p.len()).map(|j| if i == j { C64::new(c, 0.0) } else { ZERO } - I * s * p[i][j]).collect())
        .collect()
}

fn gate_matrices(u: &UnitarySpec, params: &[f64], out: &mut Vec<Mat>) {
    match u {
        UnitarySpec::Sequence { gates } => gates.iter().for_each(|g| gate_matrices(g, params, out)),
        UnitarySpec::PauliRotation { pauli, coefficient, slot } => out.push(rotation(&pauli.to_string(), coefficient * params[*slot])),
        UnitarySpec::Pauli { pauli } => out.push(pauli_matrix(&pauli.to_string())),
        other => panic!("oracle handles Pauli gates only, got {other:?}"),
    }
}

/// Gate matrices in application order: per layer `B` then `A`.
pub fn circuit_gates(model: &ModelSpec, params: &[f64]) -> Vec<Mat> {
    let mut out = Vec::new();
    for layer in &model.layers {
        gate_matrices(&layer.b_unitary, params, &mut out);
        gate_matrices(&layer.a_unitary, params, &mut out);
    }
    out
}

pub fn initial_state(model: &ModelSpec, x: &[f64]) -> Vec<C64> {
    let d = 1 << model.n_qubits;
    match model.encoder {
        DataEncoderSpec::Amplitude => {
            let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter().map(|v| C64::new(v / n, 0.0)).collect()
        }
        DataEncoderSpec::FixedBasis { index } => (0..d).map(|i| if i == index { ONE } else { ZERO }).collect(),
        ref other => panic!("oracle does not handle encoder {other:?}"),
    }
}

pub fn forward(model: &ModelSpec, params: &[f64], x: &[f64]) -> Vec<C64> {
    circuit_gates(model, params).iter().fold(initial_state(model, x), |v, g| matvec(g, &v))
}

pub fn loss(model: &ModelSpec, params: &[f64], x: &[f64]) -> f64 {
    let phi = forward(model, params, x);
    inner(&phi, &matvec(&pauli_matrix(&model.loss_obs.to_string()), &phi)).re
}

/// Central differences of the oracle loss.
pub fn finite_diff(model: &ModelSpec, params: &[f64], x: &[f64], h: f64) -> Vec<f64> {
    (0..params.len())
        .map(|i| {
            let mut p = params.to_vec();
            p[i] += h;
            let up = loss(model, &p, x);
            p[i] -= 2.0 * h;
            (up - loss(model, &p, x)) / (2.0 * h)
        })
        .collect()
}

/// `(μ, ν)` for a cut before gate `cut`: `μ` is the state entering that gate
/// and `ν = W†P₀Wμ` with `W` the remaining gates.
pub fn feature_branches(model: &ModelSpec, params: &[f64], x: &[f64], cut: usize) -> (Vec<C64>, Vec<C64>) {
    let gates = circuit_gates(model, params);
    let mu = gates[..cut].iter().fold(initial_state(model, x), |v, g| matvec(g, &v));
    let d = mu.len();
    let w = gates[cut..].iter().fold(identity(d), |acc, g| matmul(g, &acc));
    let p0 = pauli_matrix(&model.loss_obs.to_string());
    let nu = matvec(&adjoint(&w), &matvec(&p0, &matvec(&w, &mu)));
    (mu, nu)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
