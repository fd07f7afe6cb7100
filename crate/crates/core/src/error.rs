use thiserror::Error;

pub type Result<T> = std::result::Result<T, AedError>;

#[derive(Debug, Error)]
pub enum AedError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Input carries no usable variance (constant maps, identical features).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("requested {requested} principal components but the achievable maximum is {max}")]
    RankExceeded { requested: usize, max: usize },

    #[error("centered kernel matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("reconstruction error {value:e} is negative beyond round-off; eigensystem is inconsistent")]
    BrokenEigensystem { value: f64 },

    #[error("eigendecomposition failed: {0}")]
    EigenSolver(String),

    #[error("no training data: {0}")]
    NoTrainingData(String),

    #[error("model container: {0}")]
    Format(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl AedError {
    pub(crate) fn dims(expected: impl ToString, actual: impl ToString) -> Self {
        AedError::DimensionMismatch {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }
}
