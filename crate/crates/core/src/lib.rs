//! Demand-private coded caching: finite-field coding primitives, the
//! shared-link system model, placement and delivery schemes, a per-user
//! decoder, a privacy auditor, and exact memory-load tradeoff analysis.

pub mod analysis;
pub mod audit;
pub mod combinatorics;
pub mod decoder;
pub mod error;
pub mod galois;
pub mod model;
pub mod schemes;
pub mod simulate;

pub use error::{Error, Result};

/// Exact rational used for memory sizes and loads.
pub type Rational = num_rational::Ratio<i128>;
