use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("vertex sets overlap")]
    OverlappingSets,
    #[error("vertex sets do not partition the graph")]
    BadPartition,
    #[error("no edge {0}")]
    NoSuchEdge(String),
    #[error("no arc {0}")]
    NoSuchArc(usize),
    #[error("graph is not planar")]
    NotPlanar,
    #[error("embedding does not match graph: {0}")]
    NotPlanarEmbedding(String),
    #[error("graph is not connected")]
    Disconnected,
    #[error("malformed tree: {0}")]
    BadShape(String),
    #[error("leaf map is not a bijection onto the vertex set: {0}")]
    BadLeafMap(String),
    #[error("invalid tree decomposition: {0}")]
    InvalidDecomposition(String),
    #[error("no eligible edge in minor with {vertices} vertices (target Bs {target})")]
    NoEligibleEdge { vertices: usize, target: String },
    #[error("malformed sequence: {0}")]
    MalformedSequence(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("rejection budget exhausted after {0} draws")]
    RejectionBudgetExhausted(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
