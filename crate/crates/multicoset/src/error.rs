//! Crate-wide error type.
//!
//! Every fallible operation returns [`Result`]. Variants are grouped by how
//! the command-line front end reports them: malformed input, infeasible
//! parameter combinations, rank-deficient systems, and resource caps each
//! map to a distinct process exit code (see [`crate::cli`]).

use std::fmt;

/// Convenience alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input could not be parsed or violates a structural invariant
    /// (bad band list, out-of-range offset, mismatched `L`, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Parameters are well formed but the requested system is underdetermined
    /// or otherwise unsolvable (e.g. `p < q`, `p > L`).
    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    /// The modulation matrix for the given pattern/index-set pair is
    /// numerically rank deficient, so a pseudo-inverse solve is meaningless.
    #[error("rank-deficient modulation matrix for pattern {pattern:?} (σ_max/σ_min = {raw_ratio:.3e}); choose a different pattern")]
    RankDeficient {
        pattern: Vec<usize>,
        raw_ratio: f64,
    },

    /// An enumeration would exceed its configured work cap.
    #[error("search space of {required} candidates exceeds the cap of {cap}; use the SFS method instead")]
    CapExceeded { required: u128, cap: u64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl fmt::Display) -> Self {
        Error::InvalidInput(msg.to_string())
    }

    pub(crate) fn infeasible(msg: impl fmt::Display) -> Self {
        Error::Infeasible(msg.to_string())
    }
}
