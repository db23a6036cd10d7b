use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("invalid generator: {0}")]
    InvalidGenerator(String),
    #[error("chain is not reversible (max detailed-balance violation {max_violation:.3e})")]
    NotReversible { max_violation: f64 },
    #[error("null space is not one-dimensional; chain appears reducible")]
    Reducible,
    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("state count {n} exceeds dense solver guard {max}")]
    TooLarge { n: usize, max: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("eigenvector matrices not retained in this eigenstructure")]
    MissingEigenvectors,
    #[error("scaling parameters inadmissible: alpha={alpha} must exceed |2*beta+1|={bound}")]
    Inadmissible { alpha: f64, bound: f64 },
    #[error("requested tail accuracy unachievable with {terms} terms")]
    TailBound { terms: usize },
    #[error("simulation error: {0}")]
    Simulation(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
