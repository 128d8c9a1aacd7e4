use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dimension limit exceeded: {what} needs {requested}, cap is {cap}")]
    DimensionLimit { what: String, requested: usize, cap: usize },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Kraus family is not trace-non-increasing (completeness defect {0:e})")]
    NotTraceNonIncreasing(f64),

    #[error("operation requires a trace-preserving channel (completeness deviation {0:e})")]
    NotTracePreserving(f64),

    #[error("channel is not unital (trace distance to the maximally mixed output {0:e})")]
    NotUnital(f64),

    #[error("transmission probability {0:e} is too small to normalize the final state")]
    DegenerateTransmission(f64),

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or out-of-range user input.
    Input,
    /// A mathematical precondition of the operation does not hold.
    Domain,
    /// A configured size cap would be exceeded.
    Resource,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::DimensionLimit { .. } => ErrorKind::Resource,
            Error::Parse(_)
            | Error::Json(_)
            | Error::Io(_)
            | Error::InvalidParameter(_)
            | Error::DimensionMismatch(_) => ErrorKind::Input,
            Error::NotHermitian(_)
            | Error::InvalidDensity(_)
            | Error::InvalidDistribution(_)
            | Error::NotTraceNonIncreasing(_)
            | Error::NotTracePreserving(_)
            | Error::NotUnital(_)
            | Error::DegenerateTransmission(_)
            | Error::NonFinite => ErrorKind::Domain,
        }
    }
}
