use thiserror::Error;

/// Errors raised by state validation, channel construction and divergence evaluation.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("dimension must be at least {min}, got {got}")]
    DimensionTooSmall { min: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (minimum eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("trace is zero or negative ({0:.3e})")]
    TraceZero(f64),

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("eigensolver failed to converge")]
    ConvergenceFailure,

    #[error("function evaluated outside its domain at {0:.6e}")]
    DomainError(f64),

    #[error("unsupported Schatten order {0}; expected 1, 2 or infinity")]
    UnsupportedOrder(f64),

    #[error("reference state is not full rank (minimum eigenvalue {0:.3e})")]
    SingularReference(f64),

    #[error("Kraus operators are not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),

    #[error("map is not completely positive (minimum Choi eigenvalue {0:.3e})")]
    NotCompletelyPositive(f64),

    #[error("fixed space is degenerate ({0} independent fixed points)")]
    DegenerateFixedSpace(usize),

    #[error("fixed-point eigenvector has vanishing trace")]
    TraceZeroEigenvector,

    #[error("matrix is not column stochastic: {0}")]
    NotStochastic(String),

    #[error("not a probability vector: {0}")]
    NotProbability(String),

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("generator {0} is not operator convex; Petz divergence is unsupported")]
    NotOperatorConvex(String),

    #[error("invalid generator function {name}: {reason}")]
    InvalidGenerator { name: String, reason: String },

    #[error("adaptive quadrature did not reach tolerance (error estimate {error:.3e}, value {value:.6e})")]
    QuadratureFailure { value: f64, error: f64 },

    #[error("every restart collapsed onto the reference state")]
    AllRestartsDegenerate,

    #[error("channel is not primitive: {0}")]
    NotPrimitive(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for violations of mathematical preconditions (as opposed to malformed input
    /// or numerical breakdown).
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::SingularReference(_)
                | Error::NotPrimitive(_)
                | Error::DegenerateFixedSpace(_)
                | Error::NotOperatorConvex(_)
        )
    }

    /// True for numerical failures: non-convergence of a solver or optimizer.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ConvergenceFailure
                | Error::QuadratureFailure { .. }
                | Error::AllRestartsDegenerate
                | Error::TraceZeroEigenvector
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
