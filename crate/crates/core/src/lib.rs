//! Simulator for two-party distributed quantum machine-learning protocols.
//!
//! A layered circuit `|φ⟩ = A_L B_L ⋯ A_1 B_1 |ψ(x)⟩` is split between two
//! players: Alice holds the data encoding and every `A_ℓ`, Bob holds every
//! `B_ℓ`. The crate simulates the circuit with a dense statevector, runs the
//! inference, gradient-estimation and training protocols between the players,
//! and keeps an exact ledger of the quantum and classical communication.
//!
//! Module map:
//!
//! * [`statevec`]: dense states, Pauli strings, unitary specs, observables.
//! * [`circuits`]: the layered model, data encoders and preset constructions.
//! * [`protocol`]: partitioning, communication ledger, inference and feature states.
//! * [`gradients`]: parameter shift, finite differences, ancilla observables, shot budgets.
//! * [`training`]: coordinate descent, budgeted gradient descent, last-layer fine-tuning.
//! * [`baselines`]: the classical sketching protocol for linear classification.
//! * [`expressivity`]: Fourier spectra, separation rank, universal approximation.
//! * [`experiments`]: config-driven experiment runner used by the CLI.
//!
//! Basis convention: qubit 0 is the most significant bit of a basis index, so
//! `|+⟩₀|0…0⟩ = (|0⟩ + |2ⁿ⁻¹⟩)/√2`.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod baselines;
pub mod circuits;
pub mod error;
pub mod experiments;
pub mod expressivity;
pub mod gradients;
pub mod linalg;
pub mod protocol;
pub mod rng;
pub mod statevec;
pub mod tolerance;
pub mod training;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
