use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("n = {n} is outside the supported floating-point range (n <= {max})")]
    OverflowOrUnderflow { n: usize, max: usize },

    #[error("malformed game string {input:?}: {reason}")]
    MalformedGame { input: String, reason: String },

    #[error("dimension mismatch: game has n = {game}, weights have n = {weights}")]
    DimensionMismatch { game: usize, weights: usize },

    #[error(
        "tolerance {tol:e} not reached before the grid exceeded {max_grid} points (gap {gap:e})"
    )]
    ToleranceNotReached { tol: f64, gap: f64, max_grid: usize },

    #[error("n = {n} is too large for exhaustive enumeration (limit {limit})")]
    TooLarge { n: usize, limit: usize },

    #[error("polynomial has no nonzero coefficients")]
    DegeneratePolynomial,

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("CSV is missing required columns: {}", .0.join(", "))]
    MissingColumns(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
