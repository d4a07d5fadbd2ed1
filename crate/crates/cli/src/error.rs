use collapse_lab::LabError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("bound violated: {0}")]
    Bound(String),
    #[error("validation failed: {0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Bound(_) => 4,
            CliError::Validation(_) => 5,
        }
    }

    /// Errors raised while building inputs.
    pub fn config(e: LabError) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn io(what: &str, e: std::io::Error) -> Self {
        CliError::Config(format!("{what}: {e}"))
    }
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        use LabError::*;
        match e {
            DimensionOutOfRange(..)
            | NotAntisymmetric { .. }
            | UnsupportedDimension(..)
            | InvalidModel(..)
            | ModeNotInLattice { .. }
            | InvalidPotential(..)
            | InvalidArgument(..)
            | CutoffExceeded { .. }
            | NotInvariant(..)
            | ToleranceUnreachable { .. } => CliError::Config(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}
