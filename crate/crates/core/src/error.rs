use thiserror::Error;

/// Errors raised by the symbolic kernels and the JSON front end.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("input shape mismatch: {0}")]
    InputShape(String),
    #[error("series does not converge in the filtration: {0}")]
    Convergence(String),
    #[error("distribution is not nu-regular: {0}")]
    NotNuRegular(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("linear part of the coordinate change is singular")]
    SingularJacobian,
    #[error("critical point is degenerate (singular Hessian)")]
    DegenerateCriticalPoint,
    #[error("origin is not a critical point with zero critical value: {0}")]
    NotCritical(String),
    #[error("oscillatory distribution is degenerate: {0}")]
    Nondegeneracy(String),
    #[error("split cannot be evaluated in the required ordering: {0}")]
    SplitOrdering(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("requested degree {requested} exceeds the configured limit {limit}")]
    LimitExceeded { requested: i64, limit: i64 },
}

impl Error {
    /// Stable machine-readable name used in CLI error payloads.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InputShape(_) => "InputShapeError",
            Error::Convergence(_) => "ConvergenceError",
            Error::NotNuRegular(_) => "NotNuRegularError",
            Error::Precondition(_) => "PreconditionError",
            Error::SingularJacobian => "SingularJacobianError",
            Error::DegenerateCriticalPoint => "DegenerateCriticalPointError",
            Error::NotCritical(_) => "NotCriticalError",
            Error::Nondegeneracy(_) => "NondegeneracyError",
            Error::SplitOrdering(_) => "SplitOrderingError",
            Error::Parse(_) => "ParseError",
            Error::LimitExceeded { .. } => "LimitExceededError",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
