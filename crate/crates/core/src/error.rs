use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed input: bad JSON shape, unknown id, inconsistent sizes.
    #[error("schema violation: {0}")]
    Schema(String),

    #[error("resource cap exceeded: {what} needs {requested}, cap is {cap}")]
    Resource {
        what: String,
        requested: u128,
        cap: u128,
    },

    #[error("graph is disconnected: vertex {vertex:?} is unreachable from {from:?}")]
    Disconnected { vertex: String, from: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("points are not on a common geodesic: {0}")]
    NotOnGeodesic(String),

    #[error("witness oracle failed on segment ({u0}, {v0}): {reason}")]
    Oracle {
        u0: String,
        v0: String,
        reason: String,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("linear program failed: {0}")]
    Lp(String),
}

impl Error {
    pub fn schema(msg: impl Into<String>) -> Self {
        Error::Schema(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
