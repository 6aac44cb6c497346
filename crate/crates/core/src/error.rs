use thiserror::Error;

pub type Result<T, E = LabError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("potential is under-resolved: {0}")]
    UnderResolved(String),

    #[error("state of {entries} amplitudes exceeds the dense budget of {budget}")]
    MemoryBudget { entries: u128, budget: usize },

    #[error("non-finite values after step {step} (t = {time})")]
    BlowUp { step: usize, time: f64 },

    #[error("Krylov propagation missed tolerance {tolerance:e} (estimate {estimate:e})")]
    KrylovTolerance { tolerance: f64, estimate: f64 },

    #[error("malformed field dump: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LabError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        LabError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
