//! Ready-made circuits: random smooth circuits and the constructions used to
//! embed classical problems and Fourier series into the layered model.

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{BetaVector, DataEncoderSpec, Layer, ModelSpec, ParamSlot, Side};
use crate::error::{validation, Result};
use crate::linalg::{self, CMat};
use crate::statevec::{Pauli, PauliString, UnitarySpec};
use crate::tolerance::TOL;

fn log2_exact(n: usize, what: &str) -> Result<usize> {
    if n == 0 || !n.is_power_of_two() {
        return Err(validation(format!("{what} = {n} is not a power of two")));
    }
    Ok(n.trailing_zeros() as usize)
}

/// Uniform distribution for random rotation coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaRange {
    pub low: f64,
    pub high: f64,
}

impl Default for BetaRange {
    fn default() -> Self {
        Self { low: -1.0, high: 1.0 }
    }
}

pub fn random_pauli<R: Rng + ?Sized>(rng: &mut R, n: usize) -> PauliString {
    loop {
        let p = PauliString::new((0..n).map(|_| Pauli::ALL[rng.random_range(0..4)]).collect());
        if !p.is_identity() {
            return p;
        }
    }
}

/// Random smooth circuit: every `A_ℓ`, `B_ℓ` is a product of `p` rotations
/// `exp(−½iβθ𝒫)` with random non-identity Pauli strings and `β ~ U[-1, 1]`.
/// Amplitude encoder, loss `Z₀`.
pub fn preset_smooth<R: Rng + ?Sized>(n: usize, layers: usize, p: usize, rng: &mut R) -> Result<(ModelSpec, BetaVector)> {
    preset_smooth_with(n, layers, p, BetaRange::default(), rng)
}

pub fn preset_smooth_with<R: Rng + ?Sized>(
    n: usize,
    layers: usize,
    p: usize,
    beta: BetaRange,
    rng: &mut R,
) -> Result<(ModelSpec, BetaVector)> {
    if n == 0 || n > crate::statevec::MAX_QUBITS {
        return Err(crate::Error::Capacity(format!("smooth circuit with {n} qubits")));
    }
    if !(beta.low <= beta.high) {
        return Err(validation("beta range is empty"));
    }
    let mut layout = Vec::with_capacity(2 * p * layers);
    let mut out_layers = Vec::with_capacity(layers);
    for l in 0..layers {
        let mut product = |side: Side, layout: &mut Vec<ParamSlot>| {
            let gates = (0..p)
                .map(|index| {
                    let coefficient = if beta.low == beta.high { beta.low } else { rng.random_range(beta.low..beta.high) };
                    let slot = layout.len();
                    layout.push(ParamSlot { side, layer: l, index, coefficient });
                    UnitarySpec::PauliRotation { pauli: random_pauli(rng, n), coefficient, slot }
                })
                .collect();
            UnitarySpec::Sequence { gates }
        };
        let b_unitary = product(Side::B, &mut layout);
        let a_unitary = product(Side::A, &mut layout);
        out_layers.push(Layer { b_unitary, a_unitary });
    }
    let model = ModelSpec {
        n_qubits: n,
        layers: out_layers,
        encoder: DataEncoderSpec::Amplitude,
        loss_obs: PauliString::single(n, 0, Pauli::Z),
        param_layout: layout,
    };
    let beta = model.beta();
    Ok((model, beta))
}

/// One qubit, `layers` layers, every unitary the identity except the last
/// `A_L = exp(−½iθX)`. Starting from `|0⟩` with loss `Z₀` this gives
/// `ℒ(θ) = cos θ`.
pub fn preset_cos(layers: usize) -> Result<ModelSpec> {
    if layers == 0 {
        return Err(validation("need at least one layer"));
    }
    let mut ls: Vec<Layer> = (0..layers)
        .map(|_| Layer { b_unitary: UnitarySpec::identity(), a_unitary: UnitarySpec::identity() })
        .collect();
    ls[layers - 1].a_unitary = UnitarySpec::Sequence {
        gates: vec![UnitarySpec::PauliRotation { pauli: "X".parse()?, coefficient: 1.0, slot: 0 }],
    };
    Ok(ModelSpec {
        n_qubits: 1,
        layers: ls,
        encoder: DataEncoderSpec::FixedBasis { index: 0 },
        loss_obs: "Z".parse()?,
        param_layout: vec![ParamSlot { side: Side::A, layer: layers - 1, index: 0, coefficient: 1.0 }],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RazTarget {
    M1,
    M2,
}

/// Subspace-membership instance on `N = 2ⁿ` amplitudes.
///
/// `B₁` is a random orthogonal `O`; `A₁` has rows `v¹_j` (first half) and
/// `v²_j` (second half), orthonormal bases of two complementary `N/2`-dim
/// subspaces `M₁`, `M₂`. The bases are drawn so that `Ox` lies in the target
/// subspace, hence `ℒ = ‖Π₁Ox‖² − ‖Π₂Ox‖² = ±1`. Amplitude encoder on `x`.
pub fn preset_raz<R: Rng + ?Sized>(big_n: usize, x: &[f64], target: RazTarget, rng: &mut R) -> Result<ModelSpec> {
    let n = log2_exact(big_n, "N")?;
    if big_n < 4 {
        return Err(validation("subspace instance needs N ≥ 4"));
    }
    if x.len() != big_n || (linalg::real_norm(x) - 1.0).abs() > TOL.input_norm {
        return Err(validation("x must be a unit vector of length N"));
    }
    let o = linalg::random_orthogonal(rng, big_n);
    let ox: Vec<f64> = o.iter().map(|row| linalg::dot(row, x)).collect();
    let basis = linalg::complete_basis(rng, vec![ox], big_n);
    let half = big_n / 2;
    // basis[0] = Ox; it goes into the target half.
    let (v1, v2): (Vec<_>, Vec<_>) = match target {
        RazTarget::M1 => (basis[..half].to_vec(), basis[half..].to_vec()),
        RazTarget::M2 => (basis[half..].to_vec(), basis[..half].to_vec()),
    };
    let a_rows: Vec<Vec<f64>> = v1.into_iter().chain(v2).collect();
    let all: Vec<usize> = (0..n).collect();
    Ok(ModelSpec {
        n_qubits: n,
        layers: vec![Layer {
            b_unitary: UnitarySpec::DenseMatrix { qubits: all.clone(), matrix: CMat::from_real_rows(&o)? },
            a_unitary: UnitarySpec::DenseMatrix { qubits: all, matrix: CMat::from_real_rows(&a_rows)? },
        }],
        encoder: DataEncoderSpec::Amplitude,
        loss_obs: PauliString::single(n, 0, Pauli::Z),
        param_layout: vec![],
    })
}

/// Appends a second layer `B₂ = I`, `A₂ = exp(−½iθX₀)` to a subspace
/// instance. At `θ = −π/2` the parameter-shift gradient equals the original
/// loss, so the gradient sign reveals the subspace.
pub fn raz_gradient_variant(model: &ModelSpec) -> Result<ModelSpec> {
    let mut m = model.clone();
    let n = m.n_qubits;
    m.layers.push(Layer {
        b_unitary: UnitarySpec::identity(),
        a_unitary: UnitarySpec::Sequence {
            gates: vec![UnitarySpec::PauliRotation { pauli: PauliString::single(n, 0, Pauli::X), coefficient: 1.0, slot: 0 }],
        },
    });
    m.param_layout = vec![ParamSlot { side: Side::A, layer: 1, index: 0, coefficient: 1.0 }];
    Ok(m)
}

pub const RAZ_GRADIENT_ANGLE: f64 = -std::f64::consts::FRAC_PI_2;

fn check_bijection(f: &[usize], n: usize, name: &str) -> Result<()> {
    if f.len() != n {
        return Err(validation(format!("{name} has length {}, expected {n}", f.len())));
    }
    let mut seen = vec![false; n];
    for &v in f {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return Err(validation(format!("{name} is not a bijection on [N]")));
        }
    }
    Ok(())
}

/// `f^{(L₀)}(x)`: alternately apply `f_B`, `f_A`, `f_B`, … for `L₀` steps.
pub fn pointer_chase(f_a: &[usize], f_b: &[usize], l0: usize, x: usize) -> usize {
    (0..l0).fold(x, |v, step| if step % 2 == 0 { f_b[v] } else { f_a[v] })
}

/// Pointer chasing as alternating permutation unitaries.
///
/// Layer ℓ holds `B = U_{f_B}`, `A = U_{f_A}` until `L₀` applications are
/// used up; a final SWAP of qubits 0 and n−1 moves the least significant bit
/// onto qubit 0 (it replaces the last `A` when `L₀` is odd, and forms an
/// extra layer with `A = I` when `L₀` is even). Encoder `|x⟩`, loss `Z₀`, so
/// the bit is `(1 − ℒ)/2`.
pub fn preset_pointer_chasing(big_n: usize, f_a: &[usize], f_b: &[usize], l0: usize, x: usize) -> Result<ModelSpec> {
    let n = log2_exact(big_n, "N")?;
    if n < 1 {
        return Err(validation("pointer chasing needs N ≥ 2"));
    }
    check_bijection(f_a, big_n, "f_A")?;
    check_bijection(f_b, big_n, "f_B")?;
    if x >= big_n {
        return Err(validation("start index out of range"));
    }
    if l0 == 0 {
        return Err(validation("L₀ must be at least 1"));
    }
    let all: Vec<usize> = (0..n).collect();
    let perm = |f: &[usize]| UnitarySpec::Permutation { qubits: all.clone(), map: f.to_vec() };
    let swap = if n == 1 { UnitarySpec::identity() } else { UnitarySpec::swap(0, n - 1) };
    let mut layers = Vec::new();
    for k in 0..l0.div_ceil(2) {
        let last_odd = 2 * k + 1 == l0;
        layers.push(Layer { b_unitary: perm(f_b), a_unitary: if last_odd { swap.clone() } else { perm(f_a) } });
    }
    if l0.is_multiple_of(2) {
        layers.push(Layer { b_unitary: swap, a_unitary: UnitarySpec::identity() });
    }
    Ok(ModelSpec {
        n_qubits: n,
        layers,
        encoder: DataEncoderSpec::FixedBasis { index: x },
        loss_obs: PauliString::single(n, 0, Pauli::Z),
        param_layout: vec![],
    })
}

fn bit_reverse(v: usize, bits: usize) -> usize {
    if bits == 0 {
        0
    } else {
        v.reverse_bits() >> (usize::BITS as usize - bits)
    }
}

/// Register index of the 1-based ladder label `k`.
///
/// Labels are bit-reversed so that label 1 is `|0…0⟩` and label 2 is
/// `|1⟩₀|0…0⟩`, matching the `|+⟩₀|0⟩` initial state.
pub fn ladder_index(label: usize, n: usize) -> usize {
    bit_reverse(label - 1, n)
}

/// Random frequencies `λ_{ℓk} ~ U[0, 1)` with the ladder's zero pattern
/// (`λ_{ℓ1} = 0`, `λ_{L2} = 0`). Indexed `[ℓ][k−1]`.
pub fn random_ladder_lambdas<R: Rng + ?Sized>(n_prime: usize, layers: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut lam: Vec<Vec<f64>> = (0..layers).map(|_| (0..n_prime).map(|_| rng.random::<f64>()).collect()).collect();
    for row in lam.iter_mut() {
        row[0] = 0.0;
    }
    if let Some(last) = lam.last_mut() {
        last[1] = 0.0;
    }
    lam
}

/// `Λ_j̄ = Σ_{ℓ<L} λ_{ℓ j_ℓ}` (path labels 1-based).
pub fn ladder_frequency(lambdas: &[Vec<f64>], path: &[usize]) -> f64 {
    let l = path.len();
    (0..l.saturating_sub(1)).map(|i| lambdas[i][path[i] - 1]).sum()
}

/// Fourier ladder selecting a single frequency.
///
/// `A_ℓ(x) = diag(e^{−2πiλ_{ℓk}x})` (label `k` at [`ladder_index`]), `B_ℓ`
/// transposes labels `j_ℓ` and `j_{ℓ−1}` (identity when equal, `j₀ = 2`),
/// encoder `|+⟩₀|0⟩`, loss `X₀`; then `ℒ(x) = cos(2πΛ_j̄x)`.
pub fn preset_fourier_ladder(n_prime: usize, lambdas: &[Vec<f64>], path: &[usize]) -> Result<ModelSpec> {
    let n = log2_exact(n_prime, "N′")?;
    if n < 1 {
        return Err(validation("ladder needs N′ ≥ 2"));
    }
    let layers = lambdas.len();
    if layers == 0 || path.len() != layers {
        return Err(validation("need one λ row and one path entry per layer"));
    }
    if lambdas.iter().any(|r| r.len() != n_prime) {
        return Err(validation("each λ row needs N′ entries"));
    }
    if path.iter().any(|&j| j < 2 || j > n_prime) {
        return Err(validation("path entries must lie in {2, …, N′}"));
    }
    if path[0] != 2 || path[layers - 1] != 2 {
        return Err(validation("path must start and end at label 2"));
    }
    if lambdas.iter().any(|r| r[0] != 0.0) || lambdas[layers - 1][1] != 0.0 {
        return Err(validation("λ_{ℓ1} and λ_{L2} must be zero"));
    }
    let all: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(layers);
    for l in 0..layers {
        let prev = if l == 0 { 2 } else { path[l - 1] };
        let b_unitary = if prev == path[l] {
            UnitarySpec::identity()
        } else {
            let (i, j) = (ladder_index(prev, n), ladder_index(path[l], n));
            let mut map: Vec<usize> = (0..n_prime).collect();
            map.swap(i, j);
            UnitarySpec::Permutation { qubits: all.clone(), map }
        };
        let mut rates = vec![0.0; n_prime];
        for (k, &lam) in lambdas[l].iter().enumerate() {
            rates[ladder_index(k + 1, n)] = lam;
        }
        let a_unitary = UnitarySpec::DataPhase { qubits: all.clone(), rates, inputs: vec![0; n_prime] };
        out.push(Layer { b_unitary, a_unitary });
    }
    Ok(ModelSpec {
        n_qubits: n,
        layers: out,
        encoder: DataEncoderSpec::PlusZero,
        loss_obs: PauliString::single(n, 0, Pauli::X),
        param_layout: vec![],
    })
}

/// Ladder with Walsh–Hadamard mixing `B_ℓ = H^{⊗n}` and
/// `A_ℓ = diag(e^{−2πiλ_{ℓk}x})` (`λ` indexed by register index), starting
/// from `|0⟩`, loss `X₀`. With `two_variable`, entries in the first half of
/// the register read input `y = x[0]` and the second half `z = x[1]`.
pub fn preset_hadamard_ladder(n_prime: usize, lambdas: &[Vec<f64>], two_variable: bool) -> Result<ModelSpec> {
    let n = log2_exact(n_prime, "N′")?;
    if n < 1 || lambdas.is_empty() || lambdas.iter().any(|r| r.len() != n_prime) {
        return Err(validation("ladder needs N′ ≥ 2 and one λ row of length N′ per layer"));
    }
    let all: Vec<usize> = (0..n).collect();
    let inputs: Vec<usize> = (0..n_prime).map(|k| if two_variable && k >= n_prime / 2 { 1 } else { 0 }).collect();
    let mix = UnitarySpec::Sequence { gates: (0..n).map(UnitarySpec::hadamard).collect() };
    Ok(ModelSpec {
        n_qubits: n,
        layers: lambdas
            .iter()
            .map(|row| Layer {
                b_unitary: mix.clone(),
                a_unitary: UnitarySpec::DataPhase { qubits: all.clone(), rates: row.clone(), inputs: inputs.clone() },
            })
            .collect(),
        encoder: DataEncoderSpec::FixedBasis { index: 0 },
        loss_obs: PauliString::single(n, 0, Pauli::X),
        param_layout: vec![],
    })
}

/// Fourier coefficients of `Σ_m a_m cos(2πmx) + b_m sin(2πmx)`, `m < M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierCoeffs {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl FourierCoeffs {
    pub fn norm1(&self) -> f64 {
        self.cos.iter().chain(&self.sin).map(|v| v.abs()).sum()
    }

    /// Scales to unit ℓ₁ norm; returns the scaled coefficients and the scale.
    pub fn normalized(&self) -> Result<(FourierCoeffs, f64)> {
        let s = self.norm1();
        if !(s > 0.0) || !s.is_finite() {
            return Err(validation("Fourier coefficients have zero or non-finite ℓ₁ norm"));
        }
        let f = FourierCoeffs {
            cos: self.cos.iter().map(|v| v / s).collect(),
            sin: self.sin.iter().map(|v| v / s).collect(),
        };
        Ok((f, s))
    }

    pub fn eval(&self, x: f64) -> f64 {
        let tau = 2.0 * std::f64::consts::PI;
        let c: f64 = self.cos.iter().enumerate().map(|(m, a)| a * (tau * m as f64 * x).cos()).sum();
        let s: f64 = self.sin.iter().enumerate().map(|(m, b)| b * (tau * m as f64 * x).sin()).sum();
        c + s
    }
}

/// `|f̂⟩` on register `a|b|m` (qubit 0 = a, qubit 1 = b, then log M qubits).
fn fhat_state(f: &FourierCoeffs) -> Vec<C64> {
    let m_len = f.cos.len();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = vec![C64::new(0.0, 0.0); 4 * m_len];
    let sgn = |x: f64| if x < 0.0 { -1.0 } else { 1.0 };
    for m in 0..m_len {
        let (p, q) = (f.cos[m], f.sin[m]);
        // a=0,b=0 / a=1,b=0: cosine branch
        v[m] = C64::new(p.abs().sqrt() * h, 0.0);
        v[2 * m_len + m] = C64::new(sgn(p) * p.abs().sqrt() * h, 0.0);
        // a=0,b=1 / a=1,b=1: sine branch with −i·sign
        v[m_len + m] = C64::new(q.abs().sqrt() * h, 0.0);
        v[3 * m_len + m] = C64::new(0.0, -sgn(q) * q.abs().sqrt() * h);
    }
    v
}

/// Flat data phase of the single-layer construction: identity on the `a = 0`
/// half, `e^{2πimx}` on `|1⟩_a|b⟩|m⟩`.
fn universal_phase(m_len: usize) -> UnitarySpec {
    let n = 2 + m_len.trailing_zeros() as usize;
    let rates: Vec<f64> = (0..4 * m_len)
        .map(|k| if k >= 2 * m_len { -((k % m_len) as f64) } else { 0.0 })
        .collect();
    UnitarySpec::DataPhase { qubits: (0..n).collect(), rates, inputs: vec![0; 4 * m_len] }
}

/// Single-layer circuit with `ℒ(x) = Σ_m f⁺_m cos(2πmx) + f⁻_m sin(2πmx)`.
///
/// `B₁` is the Householder reflection taking `|0⟩` to `|f̂⟩` (up to a global
/// phase); it agrees with `|f̂⟩⟨0| + |0⟩⟨f̂|` on `|0⟩`, which is the only
/// column the circuit explores. Coefficients must have unit ℓ₁ norm and
/// `M = len` must be a power of two.
pub fn preset_universal_approx(f: &FourierCoeffs) -> Result<ModelSpec> {
    let m_len = f.cos.len();
    log2_exact(m_len, "M")?;
    if f.sin.len() != m_len {
        return Err(validation("cos and sin coefficient lists differ in length"));
    }
    if (f.norm1() - 1.0).abs() > TOL.input_norm {
        return Err(validation(format!("coefficients have ℓ₁ norm {}, expected 1", f.norm1())));
    }
    let n = 2 + m_len.trailing_zeros() as usize;
    let target = fhat_state(f);
    let mut e0 = vec![C64::new(0.0, 0.0); 4 * m_len];
    e0[0] = C64::new(1.0, 0.0);
    let (w, _) = linalg::householder_map(&e0, &target);
    Ok(ModelSpec {
        n_qubits: n,
        layers: vec![Layer {
            b_unitary: UnitarySpec::Householder { qubits: (0..n).collect(), vector: w },
            a_unitary: universal_phase(m_len),
        }],
        encoder: DataEncoderSpec::FixedBasis { index: 0 },
        loss_obs: PauliString::single(n, 0, Pauli::X),
        param_layout: vec![],
    })
}

/// Hierarchical variant on `L + 2` qubits (`M = 2^L`): `B₁` as in
/// [`preset_universal_approx`], `B_ℓ = I` for ℓ > 1, and
/// `A_ℓ` a qubit-0-controlled phase `e^{2πi2^{ℓ−1}x}` on the `m`-register
/// qubit of weight `2^{ℓ−1}` (qubit `L + 2 − ℓ`, since qubit 0 is the MSB).
pub fn preset_universal_hierarchical(f: &FourierCoeffs) -> Result<ModelSpec> {
    let flat = preset_universal_approx(f)?;
    let n = flat.n_qubits;
    let l_total = n - 2;
    if l_total == 0 {
        return Err(validation("hierarchical ladder needs M ≥ 2"));
    }
    let layers = (1..=l_total)
        .map(|l| Layer {
            b_unitary: if l == 1 { flat.layers[0].b_unitary.clone() } else { UnitarySpec::identity() },
            a_unitary: hierarchical_a(n, l),
        })
        .collect();
    Ok(ModelSpec { layers, ..flat })
}

/// `A_ℓ` of the hierarchical ladder on `n` qubits.
pub fn hierarchical_a(n: usize, l: usize) -> UnitarySpec {
    let weight = (1u64 << (l - 1)) as f64;
    UnitarySpec::AncillaControlled {
        control: 0,
        control_value: 1,
        inner: Box::new(UnitarySpec::DataPhase { qubits: vec![n - l], rates: vec![0.0, -weight], inputs: vec![0, 0] }),
    }
}

/// The flat `A₁` of [`preset_universal_approx`] for `M` frequencies.
pub fn universal_flat_phase(m_len: usize) -> UnitarySpec {
    universal_phase(m_len)
}
