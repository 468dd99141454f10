//! Numerical tolerances shared by every module.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Allowed deviation of `Σ|amp|²` from one.
    pub norm: f64,
    /// `‖U†U − I‖` bound asserted on constructed unitaries.
    pub unitarity: f64,
    /// `‖U†U − I‖` bound above which a user-supplied matrix is rejected.
    pub unitarity_reject: f64,
    pub hermitian: f64,
    /// `‖O² − I‖` bound for ±1-valued observables.
    pub involution: f64,
    /// Imaginary residue of an expectation value that is silently dropped.
    pub imag_residue: f64,
    /// Norm tolerance on user data (amplitude vectors, Fourier coefficients).
    pub input_norm: f64,
    /// Frequencies closer than this are merged in spectrum tables.
    pub frequency_merge: f64,
}

pub const TOL: Tolerances = Tolerances {
    norm: 1e-12,
    unitarity: 1e-10,
    unitarity_reject: 1e-8,
    hermitian: 1e-10,
    involution: 1e-10,
    imag_residue: 1e-10,
    input_norm: 1e-9,
    frequency_merge: 1e-9,
};

/// `⌈x⌉` that ignores floating-point dust just above an integer.
pub fn ceil_robust(x: f64) -> f64 {
    let slack = 1e-9 * x.abs().max(1.0);
    (x - slack).ceil()
}
