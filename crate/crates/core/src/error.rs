use alloc::string::String;

/// Errors produced by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// `λ_n(K_E) - 1` does not change sign on the search bracket.
    #[error("threshold ambiguity: level {level} does not cross 1 on the energy bracket")]
    ThresholdAmbiguity { level: usize },

    #[error("root finder did not reach tolerance for level {level} (residual {residual:e})")]
    NoConvergence { level: usize, residual: f64 },

    #[error("eigensolver did not converge")]
    EigenNoConvergence,

    #[error("domain too small: level {level} has boundary mass {boundary_mass:e}")]
    DomainTooSmall { level: usize, boundary_mass: f64 },

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("inequality violated: {claim} (slack {slack:e}, tolerance {tol:e})")]
    InequalityViolation {
        claim: String,
        slack: f64,
        tol: f64,
    },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
