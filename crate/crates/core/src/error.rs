use std::path::PathBuf;

use crate::nat::Nat;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input outside the domain of the Collatz function (zero) or of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("preimage frontier of {frontier} nodes exceeds the node budget of {budget}")]
    NodeBudgetExceeded { frontier: usize, budget: usize },

    #[error("{value} ({bits} bits) exceeds the factoring budget of {budget_bits} bits")]
    FactorBudgetExceeded {
        value: Nat,
        bits: u64,
        budget_bits: u64,
    },

    #[error("{0} is not prime")]
    NotPrime(Nat),

    #[error("unknown claim id {0:?}")]
    UnknownClaim(String),

    #[error("empty range {lo}..{hi}")]
    EmptyRange { lo: u64, hi: u64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("corrupt memo file: {0}")]
    CorruptMemo(String),

    #[error("unsupported memo format version {found} (this build reads up to {supported})")]
    MemoVersion { found: u32, supported: u32 },
}

impl Error {
    /// True for resource and budget failures, as opposed to bad input.
    pub fn is_resource(&self) -> bool {
        matches!(
            self,
            Error::NodeBudgetExceeded { .. } | Error::FactorBudgetExceeded { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn require_positive(a: &Nat, what: &str) -> Result<()> {
    if a.is_zero() {
        Err(Error::Domain(format!("{what} must be at least 1, got 0")))
    } else {
        Ok(())
    }
}
