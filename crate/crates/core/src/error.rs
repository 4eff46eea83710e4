use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inputs are individually valid but inconsistent with each other.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// A correlation was requested for a coordinate with zero variance.
    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    /// The target correlation matrix fails the admissibility checks.
    #[error("inadmissible target: {0}")]
    Inadmissible(String),

    /// No simplex weight vector reproduces the target correlations.
    #[error("infeasible target: best max-norm residual {residual:.3e} exceeds {threshold:.1e}")]
    InfeasibleTarget { residual: f64, threshold: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Configuration(msg.into())
    }
}
