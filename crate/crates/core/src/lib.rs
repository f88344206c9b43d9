//! Eigenvalue point processes of the permutation representations of the
//! symmetric group on ordered k-tuples, under the Ewens(θ) measure.
//!
//! The crate is split by concern:
//!
//! * [`ewens`] samples and scores cycle types of Ewens permutations.
//! * [`arith`] holds the exact number theory: primes, prime-exponent
//!   matrices, `g_k`, and certified angle arithmetic.
//! * [`spectrum`] turns a cycle type into the exact eigenangle multiset of
//!   the k-tuple action and cuts rescaled windows out of it.
//! * [`limit`] simulates the n → ∞ limiting point processes.
//! * [`gap`] computes gap probabilities, both by Monte Carlo and through the
//!   exact θ = 1 power series built from hypergraph sums.
//! * [`converge`] compares finite-n window counts against the limit.
//!
//! Everything random is driven by [`mc::StreamFactory`], which maps
//! `(master seed, domain, replicate)` to an independent ChaCha stream, so
//! results never depend on how many threads ran them.

pub mod arith;
pub mod converge;
pub mod error;
pub mod ewens;
pub mod gap;
pub mod limit;
pub mod manifest;
pub mod mc;
pub mod spectrum;
pub mod stats;

pub use error::{Error, Result};
