//! Sparse reconstruction with partially known support.

// NaN-rejecting checks are written as `!(x >= 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamic;
pub mod error;
pub mod harness;
pub mod io;
pub mod operators;
pub mod rip;
pub mod rng;
pub mod solvers;
pub mod supports;

pub use error::{Error, Result};
