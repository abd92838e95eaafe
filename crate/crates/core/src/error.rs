use thiserror::Error;

/// Errors produced by the estimation, simulation and signal-processing code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is singular or not positive definite ({0})")]
    SingularMatrix(String),

    #[error("rank deficient: {0}")]
    RankDeficient(String),

    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    DimensionMismatch {
        expected: usize,
        actual: usize,
        context: &'static str,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("infeasible observability pattern: {0}")]
    InfeasiblePattern(String),

    #[error("missing fused block from node {0}")]
    MissingBlock(usize),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("nothing to plot: {0}")]
    EmptyTrace(String),

    #[error("output error: {0}")]
    Output(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, actual: usize, context: &'static str) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected,
            actual,
            context,
        })
    }
}
