//! Intensity estimation for Poisson counts by penalized likelihood over
//! redundant dictionaries, with data-driven Lasso and group-Lasso weights
//! calibrated from Poisson concentration inequalities.
//!
//! The model is `Y_i ~ Poisson(f0(x_i))` with `log f0` expanded on a
//! dictionary `{phi_j}`; estimates are `exp(sum_j beta_j phi_j)`.

pub mod dictionary;
pub mod error;
pub mod metrics;
pub mod simulation;
pub mod solver;
pub mod weights;

pub use error::{Error, Result};
