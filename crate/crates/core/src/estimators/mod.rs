//! Trimmed information density estimation from samples.
//!
//! The centerpiece is the TIDE: a bounded feedforward network trained to
//! maximize the empirical Donsker–Varadhan objective
//!
//!   E_joint[g(S, X)] - log E_product[e^{g(S, X)}],
//!
//! whose population maximizer is the information density itself. Outputs
//! pass through the smooth saturation M*tanh(z/M), so every estimate lies
//! in [-M, M] while the training gradient never dies at the bound. The
//! module also carries the plug-in and Gaussian-KDE baselines and the
//! joint-weighted mean absolute error used to compare them.

mod dv;
mod field;
mod kde;
mod network;
mod persist;
mod plugin;
mod sample;
mod train;
mod wmae;

pub use dv::{dv_from_values, dv_gradient, dv_objective, dv_weighted};
pub use field::{cond_density_estimate, DensityField, DiscreteOracleField, PrefixDensity};
pub use kde::KdeEstimator;
pub use network::{Activation, FeatureLayout, TideModel};
pub use persist::{load_model, save_model, ModelFile, TrainMeta};
pub use plugin::PluginEstimator;
pub use sample::{Matrix, SampleSet};
pub use train::{tide_train, OptimizerKind, TrainConfig, TrainReport};
pub use wmae::{wmae, wmae_exhaustive};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("empty batch")]
    EmptyBatch,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("prefix length {got} out of range (feature count {max})")]
    PrefixOutOfRange { got: usize, max: usize },

    #[error("model was not trained with prefix masking; only full-feature evaluation is available")]
    PrefixUnsupported,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("training diverged at epoch {epoch}; last finite checkpoint attached")]
    TrainingDiverged {
        epoch: usize,
        checkpoint: Box<network::TideModel>,
    },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("sample set invalid: {0}")]
    InvalidSampleSet(String),

    #[error(transparent)]
    Divergence(#[from] crate::divergence::DivergenceError),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("model file: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, EstimatorError>;
