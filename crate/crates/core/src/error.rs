use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),

    #[error("coupling support M is empty")]
    EmptySupport,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("potential has non-positive infimum {0}")]
    NonPositivePotential(f64),

    #[error("linear integration overflowed at x = {0}")]
    IntegrationOverflow(f64),

    #[error("division by a vanishing coefficient at x = {0}")]
    DivisionDomain(f64),

    #[error("nonlinearity '{0}' has no growth constants")]
    UnsupportedNonlinearity(String),

    #[error("hypothesis failure: {0}")]
    HypothesisFailure(String),

    #[error("parameter {value} outside admissible range (0, {bound})")]
    ParameterOutOfRange { value: f64, bound: f64 },

    #[error("no nontrivial solution found: {0}")]
    NoNontrivialSolution(String),

    #[error("coefficients are not even: {0}")]
    SymmetryViolation(String),

    #[error("origin lies in the coupling support M")]
    SupportContainsOrigin,

    #[error("Newton iteration diverged after {iterations} steps (residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("singular Jacobian at row {0}")]
    SingularJacobian(usize),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }
}
