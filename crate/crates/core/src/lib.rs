//! Exact, desk-scale Malliavin calculus on a discretized Wiener space.
//!
//! Wiener functionals are finite Hermite chaos expansions ([`chaos`]), so
//! expectations, inner products, conditional expectations, gradients and
//! divergences are computed exactly. Monte Carlo ([`wiener`]) is used only as
//! an independent cross-check and for the in-law statements about rotations.

pub mod adapted;
pub mod chaos;
pub mod clark;
pub mod dsl;
pub mod error;
pub mod harness;
pub mod malliavin;
pub mod random;
pub mod rotations;
pub mod stats;
pub mod wiener;

pub use error::{Error, Result};
