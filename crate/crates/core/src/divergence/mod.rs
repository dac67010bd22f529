//! Exact information-density and E-gamma (hockey-stick) divergence
//! computations for discrete and Gaussian models, plus numerical verifiers
//! for the tail-integral identity, composition, the concentration bound,
//! and the post-processing counterexample for the naive tail metric.
//!
//! All densities are in nats internally; reporting layers convert to bits.

mod concentration;
mod dpi;
mod egamma;
mod gaussian;
mod info;
mod prob;
mod qfunc;

pub use concentration::{
    concentration_check_discrete, concentration_check_gaussian, ConcentrationReport,
    ConcentrationRow,
};
pub use dpi::{find_tail_dpi_violation, DpiWitness};
pub use egamma::{
    egamma_discrete, egamma_discrete_directed, egamma_gaussian, egamma_sup_bruteforce,
    egamma_tail_integral, Direction,
};
pub use gaussian::GaussianFeatureModel;
pub use info::{cond_info_density, info_density_discrete, FeatureJoint};
pub use prob::{Channel, DiscreteJoint, ProbVector};
pub use qfunc::q_function;

use thiserror::Error;

/// Probability-mass tolerance for simplex invariants.
pub const MASS_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum DivergenceError {
    #[error("probability vector invalid: {0}")]
    InvalidDistribution(String),

    #[error("alphabet mismatch: {0} vs {1}")]
    AlphabetMismatch(usize, usize),

    #[error("alphabet too large for enumeration: {0} > {1}")]
    AlphabetTooLarge(usize, usize),

    #[error("gamma must be >= 1, got {0}")]
    InvalidGamma(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("information density undefined: zero marginal at {0}")]
    ZeroMarginal(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("tail function violates its contract: {0}")]
    ContractViolation(String),
}

pub type Result<T> = std::result::Result<T, DivergenceError>;
