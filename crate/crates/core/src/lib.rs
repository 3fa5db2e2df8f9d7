//! Exact dissipative dynamics of two interacting qubits in bosonic baths.
//!
//! The two-qubit Hamiltonian with dephasing-type bath coupling decomposes
//! into a direct sum of two independent spin-boson problems, one acting on
//! the single-excitation span `{|01>, |10>}` (the P branch) and one on
//! `{|00>, |11>}` (the Q branch). Each branch is propagated with an
//! iterative quasi-adiabatic path integral and the results are reassembled
//! into an X-shaped two-qubit density matrix, from which the Wootters
//! concurrence follows in closed form.
//!
//! Module map:
//!
//! * [`model`]: Hamiltonian parameters, branch mapping, initial states, X-state assembly.
//! * [`bath`]: Ohmic spectral density, bath correlation function, influence coefficients.
//! * [`quapi`]: propagator tables and the augmented-tensor path-integral engine.
//! * [`entanglement`]: X-state and general Wootters concurrence.
//! * [`analytics`]: weak-coupling long-time formulas.
//! * [`oracles`]: independent reference solutions used for verification.
//! * [`cli`]: configuration parsing and batch workflows.

pub mod analytics;
pub mod bath;
pub mod cli;
pub mod entanglement;
pub mod error;
pub mod model;
pub mod oracles;
pub mod quadrature;
pub mod quapi;
pub mod special;

pub use error::{Error, Result};

/// Positivity tolerance: eigenvalues or populations below `-TOL_POS` are
/// rejected, values in `[-TOL_POS, 0)` are clamped where square roots are taken.
pub const TOL_POS: f64 = 1e-6;
