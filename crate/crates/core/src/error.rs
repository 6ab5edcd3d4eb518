use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("graph must have at least one vertex")]
    EmptyGraph,
    #[error("edge ({u}, {v}) references a vertex outside 0..{n}")]
    VertexOutOfRange { u: usize, v: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("graph is disconnected: vertex {unreached} is not reachable from vertex 0")]
    Disconnected { unreached: usize },
    #[error("diameter {0} does not fit the 16-bit distance store")]
    DiameterTooLarge(usize),
    #[error("{what}: {value} is too small (minimum {min})")]
    SizeTooSmall {
        what: &'static str,
        value: usize,
        min: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("failed to sample a connected graph in {attempts} attempts")]
    NoConnectedSample { attempts: usize },
    #[error("k-nearest-neighbor graph with k = {k} is disconnected; increase k")]
    KnnDisconnected { k: usize },
    #[error("unknown named graph '{0}'")]
    UnknownGraph(String),
    #[error("initial vertex list is empty")]
    EmptyInitialList,
    #[error("vertex {vertex} out of range for {n} vertices")]
    BadVertex { vertex: usize, n: usize },
    #[error("integer overflow in exact bookkeeping after {steps} vertices")]
    Overflow { steps: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("not a probability measure: {0}")]
    NotProbability(String),
    #[error("signed measure is not an admissible direction: {0}")]
    NotAdmissible(String),
    #[error("support is empty at threshold {0}")]
    EmptySupport(f64),
    #[error("measure is not balanced (support vertex {vertex} has transport cost {cost} below the maximum {max})")]
    NotBalanced { vertex: usize, cost: f64, max: f64 },
    #[error("all coordinates would be dropped")]
    AllCoordinatesDropped,
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
