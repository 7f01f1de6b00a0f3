use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum QresError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("index error: {0}")]
    Index(String),
    #[error("consistency error: {0}")]
    Consistency(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("state is not normalized (norm^2 = {0})")]
    Normalization(f64),
    #[error("fragment kind error: {0}")]
    Kind(String),
    #[error("matrix is not orthogonal (deviation {0:.3e})")]
    Orthogonality(f64),
    #[error("symmetry error: {0}")]
    Symmetry(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("empty generator pool")]
    Pool,
    #[error("state error: {0}")]
    State(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, QresError>;

impl QresError {
    /// Stable short name used in machine-readable error records and the C ABI.
    pub fn kind_name(&self) -> &'static str {
        match self {
            QresError::Parse(_) => "ParseError",
            QresError::Index(_) => "IndexError",
            QresError::Consistency(_) => "ConsistencyError",
            QresError::Dimension(_) => "DimensionError",
            QresError::Normalization(_) => "NormalizationError",
            QresError::Kind(_) => "KindError",
            QresError::Orthogonality(_) => "OrthogonalityError",
            QresError::Symmetry(_) => "SymmetryError",
            QresError::Solver(_) => "SolverError",
            QresError::Argument(_) => "ArgumentError",
            QresError::Pool => "PoolError",
            QresError::State(_) => "StateError",
            QresError::Io(_) => "IoError",
        }
    }
}
