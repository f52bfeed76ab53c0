use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GiskError {
    #[error("degree must be at least {min}, got {got}")]
    DegreeTooLow { min: usize, got: usize },
    #[error("polynomial has no real root")]
    NoRealRoot,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),
    #[error("coefficients are not strictly stable ({0})")]
    NotStrictlyStable(String),
    #[error("coefficients are not stable")]
    NotStable,
    #[error("eigenvalues must be positive")]
    NonpositiveEigenvalue,
    #[error("level-set denominator {0} is not positive")]
    DegenerateDenominator(f64),
    #[error("root tuple is not admissible: {0}")]
    InvalidRootTuple(String),
    #[error("point is not a subsolution")]
    NotSubsolution,
    #[error("integrability violated: residual {residual}")]
    IntegrabilityViolation { residual: f64 },
    #[error("degenerate phase: leading coefficient vanishes")]
    DegeneratePhase,
    #[error("reduction failed: residual x^(n-1) coefficient {0}")]
    ReductionFailed(f64),
    #[error("invalid toy model: {0}")]
    InvalidModel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, GiskError>;

impl GiskError {
    /// Malformed input as opposed to a well-posed question with a negative answer.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            GiskError::DegreeTooLow { .. }
                | GiskError::DimensionMismatch { .. }
                | GiskError::IndexOutOfRange(_)
                | GiskError::InvalidCoefficients(_)
                | GiskError::InvalidModel(_)
                | GiskError::InvalidParameter(_)
        )
    }
}
