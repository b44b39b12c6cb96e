//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("k must satisfy 1 <= k <= n/2 (got n={n}, k={k})")]
    KOutOfRange { n: u64, k: u64 },

    #[error("cycle type weight {t} exceeds n={n}")]
    WeightExceedsN { t: u64, n: u64 },

    #[error("n={n} exceeds the brute-force budget n <= {max}")]
    BruteForceBudget { n: u64, max: u64 },

    #[error("n={n} exceeds the exact-evaluation envelope n <= {max}; use the Monte Carlo estimator")]
    ExactEnvelope { n: u64, max: u64 },

    #[error("k={k} exceeds the exact limit-DP envelope k <= {max}; use the Monte Carlo estimator")]
    LimitEnvelope { k: u64, max: u64 },

    #[error("k={k} exceeds the exact bracketing envelope k <= {max}; use the Monte Carlo estimator")]
    BracketEnvelope { k: u64, max: u64 },

    #[error("need at least {min} {what}, got {got}")]
    TooFew {
        what: &'static str,
        min: usize,
        got: usize,
    },

    #[error("{0}")]
    InvalidInput(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
