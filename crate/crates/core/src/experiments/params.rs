//! Parameter records of each experiment kind.
//!
//! Fields without a serde default are required; the catalog derives its
//! required/optional split from these definitions.

use serde::{Deserialize, Serialize};

use crate::baselines::{DEFAULT_BITS_PER_COORD, DEFAULT_C};
use crate::expressivity::{DEFAULT_GRID, DEFAULT_QUADRATURE, SVD_THRESHOLD};

fn yes() -> bool {
    true
}
fn two() -> usize {
    2
}
fn theta_cos() -> f64 {
    std::f64::consts::PI - 0.5
}
fn delta_default() -> f64 {
    0.05
}
fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InferenceParams {
    pub n_qubits: usize,
    pub layers: usize,
    pub shots: u64,
    #[serde(default = "two")]
    pub rotations: usize,
    #[serde(default)]
    pub share_result: bool,
    #[serde(default = "yes")]
    pub traced: bool,
}

fn gc_qubits() -> usize {
    5
}
fn gc_layers() -> usize {
    3
}
fn gc_rot() -> usize {
    6
}
fn gc_h() -> f64 {
    1e-5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradcheckParams {
    pub instances: usize,
    #[serde(default = "gc_qubits")]
    pub max_qubits: usize,
    #[serde(default = "gc_layers")]
    pub max_layers: usize,
    /// Upper bound on rotations per unitary.
    #[serde(default = "gc_rot")]
    pub max_rotations: usize,
    #[serde(default = "gc_h")]
    pub h: f64,
}

fn radius_default() -> f64 {
    0.5
}

/// Coordinate descent on the one-qubit `cos θ` instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DpcdParams {
    pub eps0: f64,
    #[serde(default = "one")]
    pub layers: usize,
    #[serde(default = "theta_cos")]
    pub theta0: f64,
    /// Half-width of the convex region around `π`.
    #[serde(default = "radius_default")]
    pub radius: f64,
    /// Defaults to the convex iteration bound.
    #[serde(default)]
    pub iterations: Option<usize>,
    /// Defaults to `(R/‖β‖₁)√(2/T)`.
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default = "one")]
    pub repeats: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    Cos,
    Smooth,
}

fn model_cos() -> ModelChoice {
    ModelChoice::Cos
}
fn eta_gd() -> f64 {
    0.3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StdgdParams {
    pub iterations: usize,
    pub eps: f64,
    #[serde(default = "delta_default")]
    pub delta: f64,
    #[serde(default = "eta_gd")]
    pub eta: f64,
    #[serde(default = "model_cos")]
    pub model: ModelChoice,
    /// Smooth model only.
    #[serde(default = "two")]
    pub n_qubits: usize,
    #[serde(default = "one")]
    pub layers: usize,
    /// Smooth model only.
    #[serde(default = "one")]
    pub rotations: usize,
    /// Cos model only.
    #[serde(default = "theta_cos")]
    pub theta0: f64,
}

fn lambda_default() -> f64 {
    0.8
}
fn g_default() -> f64 {
    1.1
}

/// Fine-tuning of the `cos θ` instance with the strongly convex schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StdftParams {
    pub eps0: f64,
    #[serde(default = "two")]
    pub layers: usize,
    #[serde(default = "lambda_default")]
    pub lambda: f64,
    /// Gradient bound used for the iteration count.
    #[serde(default = "g_default")]
    pub g: f64,
    #[serde(default = "theta_cos")]
    pub theta0: f64,
    #[serde(default = "delta_default")]
    pub delta: f64,
    /// Accuracy of each gradient estimate; defaults to `eps0`.
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub iterations: Option<usize>,
    #[serde(default)]
    pub pool_size: Option<u64>,
    #[serde(default = "one")]
    pub repeats: usize,
}

fn trials_default() -> usize {
    20
}
fn c_default() -> f64 {
    DEFAULT_C
}
fn bits_default() -> u32 {
    DEFAULT_BITS_PER_COORD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinclassParams {
    pub n: usize,
    pub gamma: f64,
    #[serde(default = "trials_default")]
    pub trials: usize,
    #[serde(default = "c_default")]
    pub c: f64,
    #[serde(default = "bits_default")]
    pub bits_per_coord: u32,
}

fn grid101() -> usize {
    101
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    pub n_prime: usize,
    pub layers: usize,
    #[serde(default = "grid101")]
    pub grid_points: usize,
}

fn grid64() -> usize {
    64
}
fn grid128() -> usize {
    128
}
fn svd_threshold() -> f64 {
    SVD_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeprankParams {
    pub n_prime: usize,
    pub layers: usize,
    #[serde(default = "grid64")]
    pub grid: usize,
    #[serde(default = "grid128")]
    pub refined_grid: usize,
    #[serde(default = "svd_threshold")]
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetFunction {
    /// `1 − 4|x|` on `[−½, ½)`.
    Triangle,
    /// `Σ cos[m] cos(2πmx) + sin[m] sin(2πmx)`.
    TrigPoly { cos: Vec<f64>, sin: Vec<f64> },
}

fn ms_default() -> Vec<usize> {
    vec![8, 16, 32, 64]
}
fn grid_universal() -> usize {
    DEFAULT_GRID
}
fn quadrature_default() -> usize {
    DEFAULT_QUADRATURE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniversalParams {
    pub function: TargetFunction,
    #[serde(default = "ms_default")]
    pub ms: Vec<usize>,
    #[serde(default = "grid_universal")]
    pub grid: usize,
    #[serde(default = "quadrature_default")]
    pub quadrature: usize,
}

/// `N₁ × N₂` matrix, top half held by Alice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataparallelParams {
    pub rows: usize,
    pub cols: usize,
}
