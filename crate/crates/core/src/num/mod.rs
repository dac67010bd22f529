//! Shared numerical primitives: erfc, adaptive quadrature, stats helpers.

pub mod erf;
pub mod quad;
pub mod stats;

pub use erf::erfc;
pub use quad::adaptive_simpson;
pub use stats::{mean, percentile, sample_variance, wilson_interval};
