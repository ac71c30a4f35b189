//! Interpretable polynomial learning for time series.
//!
//! A degree-`s` polynomial is fitted over lag-embedded inputs through the
//! kernel `K_s(x, x') = (1 + x . x')^s` evaluated at `C(s + D, s)` centers.
//! The fitted kernel expansion is rewritten as explicit monomials whose
//! coefficients rank individual features and feature interactions. The
//! rankings feed perturbation checks, sparsity sweeps and shallow
//! early-warning rule trees.

pub mod earlywarn;
pub mod error;
pub mod interpret;
pub mod pipeline;
pub mod polycore;
pub mod rng;
pub mod solver;
pub mod timeseries;

pub use error::{IplError, Result};
pub use pipeline::{fit_ipl, mse, FitSummary, FittedIpl, IplConfig, SolverChoice};
