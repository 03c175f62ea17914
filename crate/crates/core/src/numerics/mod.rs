//! Dense complex linear-algebra kernel and random sampling.
//!
//! Everything else in the crate is built on the operations in this module:
//! Kronecker products, partial traces, trace norms, fidelities, the polar
//! alignment step used by the isometry optimizer, Haar-random unitaries and
//! states, Fourier-paired mutually unbiased bases and maximally entangled
//! vectors.

mod bases;
mod density;
mod matrix;
mod random;

pub use bases::{fourier_mub, max_entangled};
pub use density::{fidelity, DensityMatrix};
pub use matrix::{
    complete_orthonormal, dagger, frobenius_norm, hermitian_eigen, hermitian_part, identity,
    is_hermitian, kron, kron_u, kron_vec, partial_trace, polar_align, sqrt_psd, trace,
    trace_norm, trace_norm_lowrank, zeros, CMatrix, CVector, C64, DEFAULT_ENTRY_LIMIT,
};
pub use random::{haar_state, haar_state_rng, haar_unitary, haar_unitary_rng, Seed};

/// Absolute tolerance floor used by validity checks throughout the crate.
pub const ABS_TOL: f64 = 1e-12;

/// Tolerance for Hermiticity / positivity / normalization of density matrices.
pub const DENSITY_TOL: f64 = 1e-10;

/// Tolerance for channel completeness and isometry checks.
pub const CHANNEL_TOL: f64 = 1e-9;
