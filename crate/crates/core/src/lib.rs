//! Numerical laboratory for Dirac spectra on collapsing circle bundles.
//!
//! The crate builds explicit collapsing families of S¹-bundles (a warped
//! torus, a Heisenberg-type bundle over the flat torus and the form-Dirac
//! torus), assembles Galerkin matrices for the Dirac operator restricted to
//! each Fourier mode of the fiber, and compares the resulting spectra with
//! the limit operators on the base and with the lower bounds for the
//! diverging modes.
//!
//! Module map:
//!
//! * [`clifford`] gamma matrices, volume elements, two-form action.
//! * [`fourier`] trigonometric polynomials and their Toeplitz matrices.
//! * [`models`] the bundle families and their O'Neill tensors.
//! * [`operators`] per-mode, limit, V₀ and form-Dirac operators.
//! * [`potentials`] symmetric potentials, S¹-averaging, norms.
//! * [`eigensolve`] dense Hermitian eigensolver and spectrum metrics.
//! * [`bounds`] divergence bound, Kato check, audits.
//! * [`validation`] the oracle suite behind `collapse-lab validate`.

pub mod bounds;
pub mod clifford;
pub mod eigensolve;
mod error;
pub mod fourier;
pub mod matrix;
pub mod models;
pub mod operators;
pub mod potentials;
pub mod validation;

pub use error::{LabError, Result};
pub use num_complex::Complex64;
