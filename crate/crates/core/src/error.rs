use thiserror::Error;

/// Errors raised by model construction, operator assembly and the solver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("Clifford dimension {0} out of range (supported: 1..=3)")]
    DimensionOutOfRange(usize),

    #[error("coefficient table is not antisymmetric: F[{i}][{j}] = {fij}, F[{j}][{i}] = {fji}")]
    NotAntisymmetric { i: usize, j: usize, fij: f64, fji: f64 },

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    #[error("exp series did not reach tolerance {tol:e} within {max_modes} modes (error {achieved:e})")]
    ToleranceUnreachable { tol: f64, achieved: f64, max_modes: usize },

    #[error("cutoff {cutoff} exceeds the hard limit of {limit} modes")]
    CutoffExceeded { cutoff: usize, limit: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("mode k = {k} is not in the fiber lattice {lattice}")]
    ModeNotInLattice { k: String, lattice: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (asymmetry {asymmetry:e}, scale {scale:e})")]
    NotHermitian { asymmetry: f64, scale: f64 },

    #[error("potential is not invariant: term with fiber mode {0}")]
    NotInvariant(i64),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("matrix size {size} exceeds the dense solver limit {limit}")]
    SizeExceeded { size: usize, limit: usize },

    #[error("QL iteration did not converge for eigenvalue {index} after {sweeps} sweeps")]
    NoConvergence { index: usize, sweeps: usize },

    #[error("windowed spectrum is empty on [-{0}, {0}]")]
    EmptyWindow(f64),

    #[error("need {needed} eigenvalues, have {available}")]
    InsufficientEigenvalues { needed: usize, available: usize },

    #[error("spectrum window {have} is smaller than the required {need}")]
    WindowTooSmall { have: f64, need: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
