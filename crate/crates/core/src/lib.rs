//! Numerical and exact machinery for mild parametrizations of definable
//! sets: multivariate Faà di Bruno combinatorics, truncated Taylor jets,
//! the mild-bound calculus, prepared functions on cells, power and
//! exponential substitution maps, chart subdivision and rational point
//! counting with hypersurface covers.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod charts;
pub mod crosscheck;
pub mod demo;
pub mod diophantine;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod jets;
pub mod mildness;
pub mod multiindex;
pub mod random;
pub mod substitution;
pub mod sweep;

pub use error::{Error, Result};
