//! Forward and backward Collatz processes over arbitrary-precision naturals.
//!
//! The forward map is the Collatz function with `f(1) = 1`. On top of it sit
//! the order/index pair, relative speeds, backward chains under three
//! preimage policies, translated chains, a memo table for range scans, and a
//! registry of executable claims that can be checked over integer ranges.
//!
//! ```
//! use collatz_lab::{order_index, Nat, OrderIndex};
//!
//! let r = order_index(&Nat::from(3u8), 1000).unwrap();
//! assert_eq!(r, OrderIndex::Converged { tau: 3, ind: 4 });
//! ```

pub mod backward;
pub mod cache;
pub mod claims;
pub mod error;
pub mod nat;
pub mod primes;
pub mod process;

pub use backward::{
    backward_chain, backward_chain_with_budget, classify_generator, preimages, process_overlap,
    translated_chain, BackwardChain, BackwardPolicy, GeneratorVerdict, Overlap, PreimageSet,
    DEFAULT_NODE_BUDGET,
};
pub use cache::{order_index_memo, order_index_memo_traced, scan, MemoEntry, MemoTable, Splice};
pub use claims::{
    find_claim, list_claims, run_all, run_claim, sophie_germain_pairs, Budget, ClaimReport,
    ClaimSpec, Runner, ScanRange, Verdict,
};
pub use error::{Error, Result};
pub use nat::{Nat, ParseNatError};
pub use primes::{
    cunningham_length, factorize, is_prime, is_sophie_germain, mobius, omega, primality,
    FactorMultiset, Primality,
};
pub use process::{
    collatz_f, iterate, log_sum_partial, orbit, order_index, order_index_with, relative_speed,
    trajectory, Halt, Limits, OrderIndex, SpeedValue, Trajectory,
};
