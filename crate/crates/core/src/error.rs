use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numerical,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("node {node} out of range for a graph with {count} nodes")]
    NodeOutOfRange { node: NodeId, count: usize },
    #[error("graph is empty")]
    EmptyGraph,
    #[error("graph is not connected")]
    Disconnected,
    #[error("graph is not a tree")]
    NotATree,
    #[error("node {0} is isolated")]
    IsolatedNode(NodeId),
    #[error("invalid generator parameters: {0}")]
    InvalidParameters(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("trace complete: no reachable untraced infected node")]
    TraceComplete,
    #[error("node {0} is not infected")]
    NotInfected(NodeId),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("more than {cap} permitted permutations; use a sampling estimator instead")]
    EnumerationCap { cap: usize },
    #[error("literal formula denominator is {value} (non-positive) at position {position}")]
    FormulaDegenerate { position: usize, value: i64 },
    #[error("degree universe {0} is not available for this support")]
    MissingUniverse(&'static str),
    #[error("constant degree {degree} is below the maximum support degree {max}")]
    ConstantDegreeTooSmall { degree: u32, max: u32 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("non-finite value in layer {layer}: {what}")]
    NonFinite { layer: usize, what: String },
    #[error("training diverged at epoch {epoch} (graph {graph}): loss {loss}")]
    Diverged {
        epoch: usize,
        graph: usize,
        loss: f64,
    },
    #[error("degenerate normalization: {0}")]
    DegenerateNormalization(String),
    #[error("empty instance set")]
    EmptyInstances,
    #[error("nodes {0} and {1} are not connected")]
    Unreachable(NodeId, NodeId),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("empty record")]
    EmptyRecord,
    #[error("format version mismatch: expected {expected}, found {found}")]
    VersionMismatch { expected: u32, found: u32 },
    #[error("artifact kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: String, found: String },
    #[error("checksum mismatch (expected {expected}, computed {computed})")]
    Checksum { expected: String, computed: String },
    #[error("corrupt artifact: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::FormulaDegenerate { .. }
            | Error::NonFinite { .. }
            | Error::Diverged { .. }
            | Error::DegenerateNormalization(_) => ErrorClass::Numerical,
            Error::InvalidConfig(_) | Error::InvalidParameters(_) => ErrorClass::Usage,
            _ => ErrorClass::Data,
        }
    }
}
