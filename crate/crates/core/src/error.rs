//! Error type shared across the crate.

use thiserror::Error;

/// Errors raised by validation, execution and optimization routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("dimension limit exceeded: result would hold {entries} entries (max {max})")]
    DimensionLimit { entries: u128, max: u64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("hybrid structure mismatch: {0}")]
    Structure(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("protocol validation failed at node [{path}]: {reason}")]
    Protocol { path: String, reason: String },

    #[error("branch explosion: {count} live branches exceed cap {cap}")]
    BranchExplosion { count: usize, cap: usize },

    #[error("optimizer did not converge after {iterations} iterations (best value {best})")]
    NonConverged { iterations: usize, best: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
