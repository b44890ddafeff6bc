//! Discrete Hammersley last-passage percolation on `Z_+^2` with Bernoulli
//! weights, steps `e1`, `e2`, `e1 + e2`, and stationary boundary weights on
//! the axes.
//!
//! Bulk weights are collected only on diagonal entries. Axis weights are
//! collected while the path runs along an axis.

pub mod env;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod harness;
pub mod passage;
pub mod rng;
pub mod stats;
pub mod theory;

pub use error::{Error, Result};
