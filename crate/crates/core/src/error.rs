use thiserror::Error;

/// Errors produced by system assembly, solvers and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid row: {0}")]
    InvalidRow(String),

    #[error("column {column} out of range for a system with {n_cols} columns")]
    ColumnOutOfRange { column: usize, n_cols: usize },

    #[error("system has no rows")]
    EmptySystem,

    #[error("dense solve refused: {n_cols} columns exceeds the dense limit of {limit}")]
    TooLarge { n_cols: usize, limit: usize },

    #[error("singular value decomposition failed to converge")]
    SvdFailed,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("subset is inconsistent: least-squares residual {residual:e} exceeds tolerance {tol:e}")]
    InfeasibleSubset { residual: f64, tol: f64 },

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("patch contains no grid nodes")]
    EmptyPatch,

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error(
        "drop search would enumerate {subsets} subsets, over the budget of {budget}; \
         use a randomized method (kaczmarz) instead"
    )]
    BudgetExceeded { subsets: u128, budget: u128 },

    #[error("row {0} has zero norm")]
    DegenerateRow(usize),

    #[error("non-finite values at indices {0:?}")]
    NonFinite(Vec<usize>),

    #[error("corrupt cache file: {0}")]
    CorruptCache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("image encoding failed: {0}")]
    Image(#[from] image::ImageError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
