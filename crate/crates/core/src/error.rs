use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// The requested target is the Gibbs state, so no rate is defined.
    #[error("target is free: it equals the Gibbs state")]
    FreeTarget,

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("invalid shift: {0}")]
    InvalidShift(String),

    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("invalid target: {0}")]
    InvalidTarget(String),

    #[error("energy audit failed: {0}")]
    AuditFailure(String),
}

impl Error {
    /// Domain errors are caused by the request itself rather than a bug.
    pub fn is_domain_error(&self) -> bool {
        !matches!(self, Error::Infeasible(_) | Error::AuditFailure(_))
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
