use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not numerically positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("triangular factor is singular at diagonal entry {index}")]
    SingularTriangular { index: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("SVD did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("length {0} is not a power of two")]
    LengthNotPowerOfTwo(usize),

    #[error("matrix is rank deficient")]
    RankDeficient,

    #[error("unknown operation `{0}`")]
    UnknownOp(String),

    #[error("shift escalation exhausted: no power of ten up to 1 makes the Gramian positive definite")]
    ShiftEscalationExhausted,

    #[error("all columns are zero")]
    ZeroColumn,

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("precision mismatch: {0}")]
    PrecisionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("breakdown at iteration {iteration}")]
    Breakdown { iteration: usize },

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by the numerics rather than by the caller or the environment.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::SingularTriangular { .. }
                | Error::NoConvergence { .. }
                | Error::RankDeficient
                | Error::ShiftEscalationExhausted
                | Error::ZeroColumn
                | Error::Breakdown { .. }
        )
    }
}
