//! Row-coverage sample complexity for sparse orthogonal matrix factorization.
//!
//! Given `Y = VX` with `V` orthogonal and the support of `X` drawn entrywise from
//! Bernoulli(θ), recovery is impossible unless every row of `X` holds at least one
//! nonzero. This crate computes how many columns `p` that takes:
//!
//! - [`coverage`]: exact cover-time expectation, its distribution, the phase-sum
//!   expression and δ-thresholds,
//! - [`bounds`]: the closed-form lower bounds and the harmonic/digamma/Taylor helpers
//!   they are built from,
//! - [`montecarlo`]: seeded, parallel, bit-reproducible simulation of the same
//!   quantities,
//! - [`omf`]: concrete `(V, X, Y)` instances and the row-coverage check,
//! - [`cli`]: the command-line front end and its JSON/CSV records.

pub mod bounds;
pub mod cli;
pub mod coverage;
mod error;
pub mod model;
pub mod montecarlo;
pub mod omf;
pub mod output;

pub use error::{Error, Result};
pub use model::SparsityModel;
