use thiserror::Error;

use crate::multiindex::MultiIndex;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("incompatible jets: {0}")]
    JetMismatch(String),

    #[error("domain error in {op}: argument {value}")]
    Domain { op: &'static str, value: f64 },

    #[error("missing derivative entry {0}")]
    MissingDerivative(MultiIndex),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sample set is empty")]
    EmptySamples,

    /// A sample point that cannot be evaluated reliably (outside the cell
    /// after rounding, or a kernel that underflowed). Sweeps skip these and
    /// count them.
    #[error("point excluded: {0}")]
    Excluded(String),

    #[error("validation failed [{invariant}]: {detail}")]
    Validation { invariant: String, detail: String },

    #[error("membership is not exactly decidable: {0}")]
    NotExact(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn validation(invariant: &str, detail: impl Into<String>) -> Self {
        Error::Validation {
            invariant: invariant.to_string(),
            detail: detail.into(),
        }
    }

    /// Short machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::JetMismatch(_) => "jet_mismatch",
            Error::Domain { .. } => "domain",
            Error::MissingDerivative(_) => "missing_derivative",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::EmptySamples => "empty_samples",
            Error::Excluded(_) => "excluded",
            Error::Validation { .. } => "validation",
            Error::NotExact(_) => "not_exact",
            Error::Parse(_) => "parse",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
