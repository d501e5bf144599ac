use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: expected {expected} samples, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("degenerate spectrum: total power is not positive")]
    DegenerateSpectrum,

    /// Cholesky factorization of the noise covariance broke down at the given
    /// (0-based) leading minor.
    #[error("noise covariance is not positive definite (leading minor {minor})")]
    Covariance { minor: usize },

    #[error("non-finite value in {what} at iteration {iteration}")]
    NonFinite { what: &'static str, iteration: usize },

    #[error("projection did not converge at iteration {iteration}, even after shrinking the step")]
    ProjectionStalled { iteration: usize },

    #[error("empty bank: no valid entries to select from")]
    EmptyBank,

    #[error("waveform file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
