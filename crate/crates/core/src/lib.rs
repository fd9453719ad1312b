//! Fluctuations of linear eigenvalue statistics of reverse circulant random
//! matrices.
//!
//! The crate is organized bottom-up:
//!
//! * [`index`] enumerates and counts the alternating-sum constrained index
//!   tuples behind the trace formula, and implements the matching / cluster
//!   combinatorics used to bound mixed moments.
//! * [`theory`] evaluates the limiting covariance `σ_{p,q}` of the scaled,
//!   centered traces and the Gaussian-family (Wick) moments in exact
//!   rational arithmetic.
//! * [`model`] samples entries, builds the scaled reverse circulant matrix
//!   and computes `Tr M^{2p}` along three independent paths.
//! * [`oracle`] computes exact finite-`n` expectations and covariances by
//!   brute force over the trace formula.
//! * [`harness`] runs seeded Monte Carlo experiments and compares them with
//!   the theory.
//!
//! Numerical kernels are generic over the scalar type (see [`Scalar`]); the
//! aliases below fix the two instantiations used throughout.

pub mod budget;
pub mod combin;
pub mod config;
pub mod error;
pub mod harness;
pub mod index;
pub mod model;
pub mod oracle;
pub mod output;
pub mod scalar;
pub mod theory;

pub use budget::Budget;
pub use error::{Error, Result};
pub use scalar::Scalar;

/// Exact rational scalar used by every theory and oracle value.
pub type Exact = num_rational::BigRational;

/// Floating-point scalar used by simulation.
pub type Real = f64;

/// Reverse circulant matrix over `f64`.
pub type RcMatrixF64 = model::RcMatrix<f64>;

/// Reverse circulant matrix over exact rationals (unscaled integer-valued
/// entries are the typical use).
pub type RcMatrixExact = model::RcMatrix<Exact>;
