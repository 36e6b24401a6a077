use thiserror::Error;

/// Errors raised by the algebra, the operator layer and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("single-site dimension must be between 2 and {max}, got {got}")]
    InvalidKappa { got: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("site position {position} is outside 1..={sites}")]
    PositionOutOfRange { position: usize, sites: usize },

    #[error("site position {0} is used more than once")]
    OverlappingPositions(usize),

    #[error("chain length {sites} exceeds the supported maximum of {max} sites")]
    TooManySites { sites: usize, max: usize },

    #[error("target chain length {target} is smaller than the source length {source_sites}")]
    ShrinkingEmbedding { source_sites: usize, target: usize },

    #[error("basis index {index} is out of range for kappa = {kappa}")]
    BasisIndexOutOfRange { index: usize, kappa: usize },

    #[error("tensor degree mismatch: declared {declared}, multi-index has length {found}")]
    DegreeMismatch { declared: usize, found: usize },

    #[error("tensor is not irreducible: first and last factors must be traceless")]
    NotIrreducible,

    #[error("factor {index} has {components} nonzero canonical components; expand it into a polynomial first")]
    CompositeFactor { index: usize, components: usize },

    #[error("recomposition degree {requested} is below the decomposition's maximal degree {max_degree}")]
    RecomposeDegree { requested: usize, max_degree: usize },

    #[error("word with {factors} factors exceeds the dense product cap of {cap}")]
    TooManyFactors { factors: usize, cap: usize },

    #[error("dense materialization of {dim}x{dim} exceeds the configured limit of {limit}")]
    DenseLimit { dim: usize, limit: usize },

    #[error("generator bracket needs {sites} sites, above the cap of {cap}")]
    BracketTooLarge { sites: usize, cap: usize },

    #[error("{sites} sites is too small for this model (need at least {min})")]
    ChainTooShort { sites: usize, min: usize },

    #[error("iterative norm did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
