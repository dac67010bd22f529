//! Noise-scale calibration against the Gaussian E-gamma closed form.

use super::report::{GuaranteeCertificate, CERTIFICATE_CAVEAT};
use super::{MechanismError, Result};
use crate::divergence::egamma_gaussian;

/// Result of [`calibrate_lambda`]. `at_floor` marks the degenerate case
/// where even the smallest bracket value already satisfies the target, so
/// the bound is effectively vacuous at this delta/m.
#[derive(Debug, Clone)]
pub struct Calibration {
    pub lambda: f64,
    pub at_floor: bool,
    pub warning: Option<String>,
}

const BRACKET_FLOOR_FACTOR: f64 = 1e-6;
const RELATIVE_TOL: f64 = 1e-9;

/// Smallest lambda (to 1e-9 relative) with theta_{e^eps}(K, lambda) <= delta/m.
///
/// theta is continuous and strictly decreasing in lambda (it tends to 1 as
/// lambda -> 0+ and to 0 as lambda -> inf), so bisection on a geometrically
/// grown bracket converges unconditionally.
pub fn calibrate_lambda(eps: f64, delta: f64, m: usize, k_radius: f64) -> Result<Calibration> {
    if eps < 0.0 || eps.is_nan() {
        return Err(MechanismError::InvalidParameter(format!(
            "eps must be >= 0, got {eps}"
        )));
    }
    if m == 0 {
        return Err(MechanismError::InvalidParameter("m must be >= 1".into()));
    }
    if !(k_radius > 0.0) {
        return Err(MechanismError::InvalidParameter(format!(
            "K must be positive, got {k_radius}"
        )));
    }
    let target = delta / m as f64;
    if !(target > 0.0) {
        return Err(MechanismError::InvalidParameter(format!(
            "delta/m must be positive, got {target}"
        )));
    }
    let floor = BRACKET_FLOOR_FACTOR * k_radius;
    if target >= 1.0 {
        // E_gamma never exceeds 1: any lambda works, return the floor.
        return Ok(Calibration {
            lambda: floor,
            at_floor: true,
            warning: Some(format!(
                "delta/m = {target} >= 1 makes the bound vacuous; returning the bracket floor"
            )),
        });
    }
    let gamma = eps.exp();
    let theta = |lambda: f64| egamma_gaussian(k_radius, lambda, gamma);

    if theta(floor)? <= target {
        return Ok(Calibration {
            lambda: floor,
            at_floor: true,
            warning: Some(format!(
                "delta/m = {target} is satisfied already at the bracket floor {floor:e}"
            )),
        });
    }
    let mut lo = floor;
    let mut hi = k_radius;
    let mut grow = 0;
    while theta(hi)? > target {
        lo = hi;
        hi *= 2.0;
        grow += 1;
        if grow > 200 {
            return Err(MechanismError::NumericFailure(format!(
                "bracket grew past {hi:e} without satisfying delta/m = {target}"
            )));
        }
    }
    // invariant: theta(lo) > target >= theta(hi)
    let mut iterations = 0;
    while hi - lo > RELATIVE_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if theta(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
        if iterations > 200 {
            return Err(MechanismError::NumericFailure(
                "bisection failed to converge".into(),
            ));
        }
    }
    Ok(Calibration {
        lambda: hi,
        at_floor: false,
        warning: None,
    })
}

/// Certificate for running the mechanism at (eps, lambda) over m features
/// of radius K: per-feature level theta_{e^eps}(K, lambda) and the composed
/// (m*eps, m*theta) guarantee.
pub fn leakage_bound(eps: f64, lambda: f64, k_radius: f64, m: usize) -> Result<GuaranteeCertificate> {
    if m == 0 {
        return Err(MechanismError::InvalidParameter("m must be >= 1".into()));
    }
    let per_feature_delta = if eps.is_infinite() {
        0.0
    } else {
        egamma_gaussian(k_radius, lambda, eps.exp())?
    };
    Ok(GuaranteeCertificate {
        per_feature_eps: eps,
        per_feature_delta,
        composed_eps: m as f64 * eps,
        composed_delta: m as f64 * per_feature_delta,
        k_radius,
        lambda,
        m,
        caveat: CERTIFICATE_CAVEAT.to_string(),
    })
}
