use thiserror::Error;

/// Errors raised by the dependence estimators, tests, and harnesses.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input contains a non-finite value at row {row}, column {col}")]
    NonFiniteInput { row: usize, col: usize },

    #[error("need at least {required} samples, got {got}")]
    TooFewSamples { required: usize, got: usize },

    #[error("row count mismatch: {0} vs {1}")]
    RowCountMismatch(usize, usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("all samples are identical; the bandwidth heuristic would be zero")]
    AllSamplesIdentical,

    #[error("invalid bandwidth {0}; must be finite and > 0")]
    InvalidBandwidth(f64),

    #[error("feature map is already centered")]
    AlreadyCentered,

    #[error("feature map must be centered first")]
    NotCentered,

    #[error("degenerate null distribution: {0}")]
    DegenerateNull(String),

    #[error("significance level {0} must lie strictly between 0 and 1")]
    InvalidAlpha(f64),

    #[error("{permutations} permutations cannot resolve level {alpha}; need at least {needed}")]
    TooFewPermutations {
        permutations: usize,
        alpha: f64,
        needed: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("zero variance input")]
    ZeroVariance,

    #[error("rate fit needs strictly positive errors, got {0}")]
    NonPositiveError(f64),

    #[error("power iteration did not converge in {0} iterations")]
    PowerIterationNoConvergence(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
