//! Fourier expressivity of ladder circuits.
//!
//! * [`enumerate_spectrum`] lists the frequencies of a Hadamard-mixed ladder
//!   by summing over index paths, and [`spectrum_vs_grid`] checks the table
//!   against direct simulation.
//! * [`separation_rank`] estimates the separation rank of a two-input ladder
//!   from the singular values of a sample grid.
//! * [`universal_error_curve`] builds the single-layer universal circuit for
//!   a truncated Fourier series and measures the sup-norm error.

mod seprank;
mod spectrum;
mod universal;

pub use seprank::{numerical_rank, predicted_separation_rank, separation_rank, SeparationRankReport, SVD_THRESHOLD};
pub use spectrum::{
    enumerate_spectrum, predicted_frequency_count, spectrum_vs_grid, FrequencyTable, FrequencyTerm, COEFF_TOL, MAX_PATH_PAIRS,
};
pub use universal::{
    fourier_coefficients, hierarchical_phase_deviation, loglog_slope, triangle_wave, universal_error_curve, UniversalPoint,
    DEFAULT_GRID, DEFAULT_QUADRATURE,
};
