//! Exact construction, sampling and verification of Gibbs fragmentation
//! processes.
//!
//! A Gibbs fragmentation process on `[n]` is a sequence of random set
//! partitions `Π_1, …, Π_n` where `Π_k` has exactly `k` blocks, follows the
//! Gibbs(w) law conditioned on `k` blocks, and `Π_{k+1}` arises from `Π_k` by
//! splitting a single block. For the uniform-permutation weights
//! `w_j = (j-1)!` such a process is built from the Chinese restaurant process
//! and a monotone coupling of conditioned Bernoulli record vectors. For the
//! exchangeable family `w_j = (1-α)_{j-1↑1}` the record vectors can still be
//! coupled monotonically.
//!
//! Everything is computed with exact rationals. Couplings come from an integer
//! max-flow solve; infeasible instances produce a violated-subset certificate.
//!
//! Module map:
//!
//! - [`weights`]: rising factorials, generalized Stirling numbers, Bell
//!   polynomials, `v`-arrays and block-count laws.
//! - [`records`]: laws of record (block-minimum) indicator vectors.
//! - [`coupling`]: cover graphs, feasibility, extreme couplings, chains.
//! - [`crp`]: Chinese restaurant seating and the fragmentation samplers.
//! - [`lattice`]: brute-force set-partition enumeration and oracles.
//! - [`cli`]: the `gibbsfrag` command line.

pub mod cli;
pub mod coupling;
pub mod crp;
mod error;
mod flow;
pub mod lattice;
pub mod layer;
pub mod rational;
pub mod records;
pub mod weights;

pub use error::{Error, Result};
pub use layer::LayerDistribution;
pub use rational::Rational;
