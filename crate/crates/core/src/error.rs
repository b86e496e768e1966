use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QError {
    #[error("|q| must satisfy 0 < |q| < 1 (got |q| = {0})")]
    ModulusOfQOutOfRange(f64),
    #[error("truncation failure: {0}")]
    TruncationFailure(String),
    #[error("divergent series: {0}")]
    DivergentSeries(String),
    #[error("pole in denominator: {0}")]
    PoleInDenominator(String),
    #[error("zero argument: {0}")]
    ZeroArgument(String),
    #[error("complex power with zero base")]
    ZeroBase,
    #[error("outside convergence domain: {0}")]
    OutOfConvergenceDomain(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("K+L is not invariant under F (residual {0:e})")]
    QuotientNotInvariant(f64),
    #[error("elimination singular: {0}")]
    EliminationSingular(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl QError {
    /// True for errors that mean "this point is outside where the formula is valid".
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            QError::OutOfConvergenceDomain(_)
                | QError::PoleInDenominator(_)
                | QError::DivergentSeries(_)
                | QError::ZeroArgument(_)
                | QError::ZeroBase
        )
    }
}

pub type Result<T> = std::result::Result<T, QError>;
