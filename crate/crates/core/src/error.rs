use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("joint dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid atom state: eigenvalue {0:e} below tolerance")]
    InvalidAtomState(f64),

    #[error("invalid battery state: {0}")]
    InvalidState(String),

    /// A collision produced a state outside the validity tolerances.
    #[error("numerical invariant violated after step {step}: {reason}")]
    InvariantViolation { step: usize, reason: String },

    /// `v + Ω ≤ 0`: the protocol does not charge the battery.
    #[error("NonCharging: v + Omega = {0:e} does not charge the battery")]
    NonCharging(f64),

    #[error("ZeroSteps: power is undefined at k = 0")]
    ZeroSteps,
}

impl Error {
    /// Short machine-readable tag, used in CSV error columns.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::DimensionCap { .. } => "DimensionCap",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidAtomState(_) => "InvalidAtomState",
            Error::InvalidState(_) => "InvalidState",
            Error::InvariantViolation { .. } => "InvariantViolation",
            Error::NonCharging(_) => "NonCharging",
            Error::ZeroSteps => "ZeroSteps",
        }
    }

    /// True for failures of numerical invariants, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::InvariantViolation { .. } | Error::InvalidState(_) | Error::InvalidAtomState(_)
        )
    }
}
