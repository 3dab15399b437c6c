//! Exact algebra of polynomial Wiener functionals in the Hermite chaos basis.

mod hermite;
mod multi_index;
mod poly;
mod text;

pub use hermite::hermite_value;
pub use multi_index::MultiIndex;
pub use poly::{linear_combine, Ambient, ChaosPoly, DEFAULT_DEGREE_CAP, MAX_DIM, PRUNE_THRESHOLD};
