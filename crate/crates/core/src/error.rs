use thiserror::Error;

/// Errors produced by graph construction, simulation and analysis.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    Dimension(String),

    #[error("invalid size: {0}")]
    Size(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    Mismatch { expected: usize, actual: usize },

    #[error("ledger was built for the {ledger} policy but the step uses {policy}")]
    LedgerPolicy {
        ledger: &'static str,
        policy: &'static str,
    },

    #[error("load overflow at vertex {vertex}")]
    Overflow { vertex: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("compute budget exceeded: {0}")]
    Budget(String),

    #[error("cannot parse graph spec {spec:?}: {reason}")]
    GraphSpec { spec: String, reason: String },

    #[error("unknown column {0:?}")]
    UnknownColumn(String),

    #[error("missing data: {0}")]
    Missing(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
