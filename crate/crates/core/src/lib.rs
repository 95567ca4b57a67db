//! Truncated path signatures under Stratonovich and Itô lifts, the shuffle
//! algebra of words, polynomial payoff approximation and Monte Carlo pricing
//! through signature correlators.
//!
//! The Monte Carlo kernel is data-parallel over paths (rayon, behind the
//! default `parallel` feature) and produces bit-identical results for any
//! worker count.

pub mod algebra;
pub mod approx;
pub mod correlator;
pub mod error;
pub mod io;
pub mod numeric;
pub mod parallel;
pub mod pricing;
pub mod signature;
pub mod stochastic;

pub use error::{Error, Result};
