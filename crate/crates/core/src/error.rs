use thiserror::Error;

/// Error type shared by every module of the laboratory.
#[derive(Debug, Error)]
pub enum LabError {
    /// A constructor argument is out of its admissible range.
    #[error("invalid configuration for `{field}`: {message}")]
    Config { field: &'static str, message: String },

    /// Operand dimensions do not match.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A state spills outside the frequency grid.
    #[error("state support error: {0}")]
    Support(String),

    /// A coherent state cannot be represented below the requested tail weight.
    #[error("truncation error: {0}")]
    Truncation(String),

    /// U and Omega are only defined on states orthogonal to vacuum.
    #[error("operator undefined on vacuum: {0}")]
    UndefinedOnVacuum(String),

    /// A classical conformal map was asked to cross its horizon.
    #[error("flow domain error: {0}")]
    Domain(String),

    /// The operation only exists in one of the two representations.
    #[error("unsupported representation: {0}")]
    UnsupportedRep(String),

    /// Caller violated an operation contract (e.g. variance of a non-hermitian operator).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unknown check id `{id}`; valid ids: {valid}")]
    UnknownCheck { id: String, valid: String },

    #[error("i/o failure at `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, LabError>;

impl LabError {
    pub fn config(field: &'static str, message: impl Into<String>) -> Self {
        LabError::Config {
            field,
            message: message.into(),
        }
    }
}
