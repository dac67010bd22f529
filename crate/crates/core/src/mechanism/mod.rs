//! Information-leaking feature identification, Gaussian noise calibration,
//! the sequential obfuscation mechanism, and composition accounting.
//!
//! A feature is flagged when some attribute value drives the estimated
//! conditional information density above the threshold; flagged features
//! receive additive Gaussian noise whose scale is calibrated so the
//! per-feature E-gamma divergence stays below delta/m, which composes to an
//! (m*eps, delta) guarantee over the whole sample.

mod calibrate;
mod config;
mod identify;
mod obfuscate;
mod report;
mod verify;

pub use calibrate::{calibrate_lambda, leakage_bound, Calibration};
pub use config::MechanismConfig;
pub use identify::identify_leaking;
pub use obfuscate::obfuscate;
pub use report::{GuaranteeCertificate, LeakageEntry, LeakageReport};
pub use verify::{
    composition_bruteforce_check, verify_feature_guarantee, CompositionCheck, GuaranteeCheckRow,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MechanismError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty attribute alphabet")]
    EmptyAlphabet,

    #[error("report does not match the feature sequence: {0}")]
    ReportMismatch(String),

    #[error("noise calibration failed to converge: {0}")]
    NumericFailure(String),

    #[error(transparent)]
    Estimator(#[from] crate::estimators::EstimatorError),

    #[error(transparent)]
    Divergence(#[from] crate::divergence::DivergenceError),
}

pub type Result<T> = std::result::Result<T, MechanismError>;
