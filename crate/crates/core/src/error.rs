use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument outside the domain of {function}: {detail}")]
    Domain {
        function: &'static str,
        detail: String,
    },

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("degenerate LoS spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("{0} overflows double precision")]
    Overflow(&'static str),

    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("no finite high-SNR ceiling with ideal hardware (delta_t = delta_r = 0)")]
    NoCeiling,

    #[error("large-N_r limit is unbounded for delta_t = 0")]
    Unbounded,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unsupported by the exact engine: {0}")]
    Unsupported(String),

    #[error("division by zero in {0}")]
    DivisionByZero(&'static str),
}

impl Error {
    /// Stable variant name, used on stderr by the command-line tool.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "Domain",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::DegenerateSpectrum(_) => "DegenerateSpectrum",
            Error::Overflow(_) => "Overflow",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NoCeiling => "NoCeiling",
            Error::Unbounded => "Unbounded",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Unsupported(_) => "Unsupported",
            Error::DivisionByZero(_) => "DivisionByZero",
        }
    }

    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::DegenerateSpectrum(_)
                | Error::Overflow(_)
                | Error::NotPositiveDefinite { .. }
                | Error::NoCeiling
                | Error::Unbounded
                | Error::DivisionByZero(_)
        )
    }

    pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            function,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
