use std::path::PathBuf;

use thiserror::Error;

use crate::strategy::Fault;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("expected {expected} actions, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("stock {stock} outside [0, {capacity}]")]
    StockOutOfRange { stock: f64, capacity: f64 },

    #[error("strategy `{label}` (player {player}) faulted in round {round}: {fault}")]
    StrategyFault {
        label: String,
        player: usize,
        round: usize,
        fault: Fault,
    },

    #[error("strategy `{label}` faulted at fingerprint node {node}: {fault}")]
    FingerprintFault {
        label: String,
        node: String,
        fault: Fault,
    },

    #[error("pool `{pool}` has {available} members, {requested} requested")]
    PoolTooSmall {
        pool: String,
        available: usize,
        requested: usize,
    },

    #[error("gene {0} has no registered pool")]
    UnregisteredGene(String),

    #[error("{0}")]
    Undefined(String),

    #[error("{path}: {message}")]
    PolicyFile { path: PathBuf, message: String },

    #[error("unsupported schema_version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn params(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }

    /// True when the error originates from a strategy misbehaving rather than
    /// from configuration or I/O.
    pub fn is_strategy_fault(&self) -> bool {
        matches!(
            self,
            Error::StrategyFault { .. } | Error::FingerprintFault { .. }
        )
    }
}
