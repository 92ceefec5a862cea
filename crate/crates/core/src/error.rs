use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate resonance at {freq_hz} Hz: response is unbounded without damping")]
    DegenerateResonance { freq_hz: f64 },

    #[error("singular input-output system at {freq_hz} Hz (condition number {condition:.3e})")]
    SingularSystem { freq_hz: f64, condition: f64 },

    #[error("root finding failed: {0}")]
    RootNotBracketed(String),

    #[error("cannot refer `{label}` to displacement: {reason}")]
    UnitMismatch { label: String, reason: String },

    #[error("frequency grids differ: {0}")]
    GridMismatch(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("feedback loop is unstable: {0}")]
    UnstableLoop(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("non-physical solution: {0}")]
    NonPhysical(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad inputs rather than numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. } | Error::GridMismatch(_) | Error::UnitMismatch { .. }
        )
    }
}
