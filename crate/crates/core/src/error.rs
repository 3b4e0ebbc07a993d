use thiserror::Error;

use crate::series::MomentSeries;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range (length {len})")]
    Index { index: usize, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("internal consistency violated: {0}")]
    Consistency(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("oracle size limit exceeded: dimension {dimension} > {limit}")]
    OracleSize { dimension: usize, limit: usize },

    #[error("oracle Fock cutoff too small: truncated norm deficit {deficit:e}")]
    OracleCutoff { deficit: f64 },

    #[error(
        "alive fraction {alive_fraction:.4} fell below floor {floor} at step {step} (t = {time})"
    )]
    AbortFloor {
        alive_fraction: f64,
        floor: f64,
        step: usize,
        time: f64,
        partial: Box<MomentSeries>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
