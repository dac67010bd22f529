//! Mechanism parameter bundle.

use serde::{Deserialize, Serialize};

use super::{MechanismError, Result};
use crate::divergence::egamma_gaussian;

/// (eps, delta, m, K, lambda, M) bundle governing leaking-set detection,
/// noise calibration, and composition accounting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MechanismConfig {
    /// Leakage threshold; may be infinite (flag nothing).
    pub eps: f64,
    /// Total divergence budget over the sample.
    pub delta: f64,
    /// Feature count.
    pub m: usize,
    /// Radius of the compact feature domain, K = max norm over it.
    pub k_radius: f64,
    /// Gaussian noise scale.
    pub lambda: f64,
    /// Estimator trim bound M; thresholds above 2M can never flag.
    pub trim_bound: f64,
    /// Clamp mechanism output back into the feature domain (post-processing;
    /// only reduces E-gamma leakage).
    pub clamp_output: bool,
}

impl MechanismConfig {
    pub fn validate(&self) -> Result<()> {
        if self.eps < 0.0 || self.eps.is_nan() {
            return Err(MechanismError::InvalidParameter(format!(
                "eps must be >= 0, got {}",
                self.eps
            )));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(MechanismError::InvalidParameter(format!(
                "delta must lie in (0, 1], got {}",
                self.delta
            )));
        }
        if self.m == 0 {
            return Err(MechanismError::InvalidParameter("m must be >= 1".into()));
        }
        if !(self.k_radius > 0.0) {
            return Err(MechanismError::InvalidParameter(format!(
                "K must be positive, got {}",
                self.k_radius
            )));
        }
        if !(self.lambda > 0.0) {
            return Err(MechanismError::InvalidParameter(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if !(self.trim_bound > 0.0) {
            return Err(MechanismError::InvalidParameter(format!(
                "trim bound must be positive, got {}",
                self.trim_bound
            )));
        }
        Ok(())
    }

    /// Per-feature divergence level theta_{e^eps}(K, lambda) actually
    /// achieved by this configuration. Infinite eps yields 0.
    pub fn per_feature_level(&self) -> Result<f64> {
        if self.eps.is_infinite() {
            return Ok(0.0);
        }
        Ok(egamma_gaussian(self.k_radius, self.lambda, self.eps.exp())?)
    }

    /// Checks the calibration invariant theta_{e^eps}(K, lambda) <= delta/m.
    pub fn check_calibrated(&self) -> Result<()> {
        self.validate()?;
        let level = self.per_feature_level()?;
        let target = self.delta / self.m as f64;
        if level > target {
            return Err(MechanismError::InvalidParameter(format!(
                "uncalibrated mechanism: theta = {level:.6} exceeds delta/m = {target:.6}"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> MechanismConfig {
        MechanismConfig {
            eps: 0.5,
            delta: 0.24,
            m: 1,
            k_radius: 1.0,
            lambda: 1.0,
            trim_bound: 5.0,
            clamp_output: false,
        }
    }

    #[test]
    fn calibrated_config_passes() {
        // theta(1, 1, e^0.5) ~= 0.2384 <= 0.24
        base().check_calibrated().unwrap();
    }

    #[test]
    fn uncalibrated_config_fails() {
        let mut c = base();
        c.delta = 0.2; // below the achieved 0.2384
        assert!(c.check_calibrated().is_err());
    }

    #[test]
    fn infinite_eps_is_always_calibrated() {
        let mut c = base();
        c.eps = f64::INFINITY;
        c.delta = 1e-9;
        c.check_calibrated().unwrap();
    }

    #[test]
    fn invalid_fields_rejected() {
        let mut c = base();
        c.delta = 0.0;
        assert!(c.validate().is_err());
        let mut c = base();
        c.lambda = -1.0;
        assert!(c.validate().is_err());
        let mut c = base();
        c.m = 0;
        assert!(c.validate().is_err());
    }
}
