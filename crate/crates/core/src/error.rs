use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("edge list contains no edges and no '# nodes N' header")]
    EmptyGraph,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("node {node} has non-positive centrality {value}; the diagonal matrix V must be strictly positive")]
    NonPositiveCentrality { node: usize, value: f64 },

    #[error("node {node} is isolated")]
    IsolatedNode { node: usize },

    #[error("PageRank did not converge after {iterations} iterations (L1 residual {residual:e})")]
    PageRankNotConverged { iterations: usize, residual: f64 },

    #[error("walk count overflowed u64 at length {length} (node {node}); use a floating accumulator for long walks")]
    WalkCountOverflow { length: u32, node: usize },

    #[error("unknown preset '{name}'; valid presets: {valid}")]
    UnknownPreset { name: String, valid: String },

    #[error("operators are defined on different graphs")]
    GraphMismatch,

    #[error("dense materialization of {n} nodes exceeds the limit of {limit}; use the matrix-free apply path")]
    DenseLimitExceeded { n: usize, limit: usize },

    #[error("matrix is not symmetric (max asymmetry {max_asymmetry:e})")]
    NotSymmetric { max_asymmetry: f64 },

    #[error("eigensolver failed to converge")]
    EigenNotConverged,

    #[error("all eigenvalues of I - M are below the zero tolerance {zero_tol:e}")]
    DegenerateSpectrum { zero_tol: f64 },

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("brute-force enumeration supports at most {max} nodes, got {n}")]
    TooManyNodes { n: usize, max: usize },

    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),
}
