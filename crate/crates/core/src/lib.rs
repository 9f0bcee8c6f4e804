//! Optimization-based atomistic-to-continuum coupling for a 1D
//! next-nearest-neighbor chain.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod coupling;
pub mod error;
pub mod io;
pub mod lattice;
pub mod operators;
pub mod solvers;

pub use error::{AtcError, Result};
