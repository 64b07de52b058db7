use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty graph")]
    EmptyGraph,

    #[error("layer collision: identifier `{0}` appears in both layers")]
    LayerCollision(String),

    #[error("self-similarity undefined for row {0}")]
    SelfSimilarity(usize),

    #[error("index {index} out of range for layer of size {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("BiCM fit did not converge after {iterations} iterations (max residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("degenerate degree: {0}")]
    DegenerateDegree(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("p-value {0} outside [0, 1]")]
    InvalidPValue(f64),

    #[error("projection does not derive from the given bipartite graph")]
    MismatchedSource,

    #[error("undefined modularity: graph has no edges")]
    UndefinedModularity,

    #[error("partition covers {got} nodes, graph has {expected}")]
    PartitionSize { expected: usize, got: usize },

    #[error("undefined for degree 0 (node `{0}`)")]
    IsolatedNode(String),

    #[error("empty community {0}")]
    EmptyCommunity(usize),

    #[error("empty sample")]
    EmptySample,

    #[error("no fixed labels supplied")]
    NoFixedLabels,

    #[error("no verified users")]
    NoVerifiedUsers,

    #[error("no users in category {0}")]
    NoUsersInCategory(String),

    #[error("corrupt input: {malformed} of {total} lines malformed")]
    CorruptInput { malformed: usize, total: usize },

    #[error("unsupported format header `{0}`")]
    UnsupportedFormat(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by bad input data or arguments rather than the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}
