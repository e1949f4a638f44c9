//! Exact and Monte Carlo analysis of the maximum in hierarchical Bernoulli
//! summation schemes.
//!
//! i.i.d. +-1 variables sit on the edges of a binary tree; every leaf
//! carries the sum along its root path and M_n is the largest of the 2^n
//! leaf sums. The crate evolves the exact tail of the normalized maximum
//! level by level, carries the one-parameter family of invariant tails that
//! the symmetric scheme spirals along, reduces drifting schemes to critical
//! ones by exponential tilting, verifies the double-exponential
//! approximation for maxima of independent lattice sums against an exact
//! log-space oracle, and cross-checks everything with seeded, reproducible
//! simulation.

pub mod criticality;
pub mod engine;
pub mod error;
pub mod gumbel;
pub mod helix;
pub mod joint;
pub mod maps;
pub mod numeric;
pub mod sim;
pub mod tail;

pub use error::{Error, OpBudget, Result, DEFAULT_OP_BUDGET};
pub use tail::TailFunction;
