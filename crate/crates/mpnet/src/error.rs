//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{path}:{line}: unknown profile id {id:?}")]
    UnknownId {
        path: String,
        line: usize,
        id: String,
    },

    #[error("intra-household edge between {u:?} and {v:?} but the dataset forbids them{}", context.as_deref().map(|c| format!(" ({c})")).unwrap_or_default())]
    IntraHouseholdEdge {
        u: String,
        v: String,
        context: Option<String>,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty network")]
    EmptyNetwork,

    #[error("attribute is constant")]
    ConstantAttribute,

    #[error("zero variance")]
    ZeroVariance,

    #[error("degenerate metric")]
    DegenerateMetric,

    #[error("no tail")]
    NoTail,

    #[error("no wedges")]
    NoWedges,

    #[error("no family pairs")]
    NoFamilyPairs,

    #[error("insufficient pairs: need {needed}, have {available}")]
    InsufficientPairs { needed: usize, available: usize },

    #[error("both classes must be present")]
    SingleClass,

    #[error("operator has no spectrum")]
    NoSpectrum,

    #[error("eigensolver did not converge: {converged} of {requested} pairs after {iterations} iterations")]
    NonConvergence {
        converged: usize,
        requested: usize,
        iterations: usize,
    },

    #[error("optimizer did not converge after {iterations} iterations (gradient norm {gradient_norm:.3e})")]
    OptimizerDiverged {
        iterations: usize,
        gradient_norm: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
