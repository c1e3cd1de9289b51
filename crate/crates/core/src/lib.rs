//! Word maps with constants on the symmetric groups.
//!
//! Words live in the free product `S_n * F_r`: constant permutations interleaved with signed
//! variables. The crate covers their reduced normal form and classification, exact and sampled
//! distributions of word values, exact Kantorovich–Rubinstein (optimal transport) distances under
//! the normalized Hamming metric, return-probability bounds with Monte-Carlo audits, freeness and
//! equidistribution experiments for word tuples, and a simulated-annealing search for approximate
//! solutions of word equations.
//!
//! Permutations act on the right: `a.compose(&b)` first applies `a`, then `b`. Words are evaluated
//! left to right with the same convention, so `x1 (1 2)` maps `i` to `(1 2)(σ(i))`.

pub mod anneal;
pub mod bounds;
pub mod error;
pub mod eval;
pub mod perm;
pub mod rng;
pub mod sae;
pub mod transport;
pub mod word;

pub use error::{Error, Result};
pub use eval::{Atom, Distribution, DistributionKind};
pub use perm::{CycleStats, Permutation};
pub use rng::SeedPlan;
pub use transport::{Ground, TransportPlan};
pub use word::{Classification, FreeWord, Letter, Sign, Var, Word};

/// Exact rational used for weights, distances and plan costs.
pub type Rational = num_rational::Ratio<i128>;

/// Hard cap on the number of word evaluations performed by any exact enumeration.
pub const ENUMERATION_BUDGET: u128 = 100_000_000;
