//! Leaking-set identification from bounded density estimates.

use super::report::{LeakageEntry, LeakageReport};
use super::{MechanismError, Result};
use crate::estimators::{cond_density_estimate, PrefixDensity};

/// Flags every feature whose estimated conditional information density
/// exceeds `eps` in absolute value for some attribute in `s_alphabet`.
///
/// `x_ordered` is the flat feature sequence already arranged in the
/// estimator's conditioning order; `ordering[p]` records which original
/// feature sits at position p, and is carried into the report. Estimates
/// are bounded by 2M, so eps >= 2M can never flag anything (the threshold
/// is strict).
pub fn identify_leaking<F: PrefixDensity + ?Sized>(
    estimator: &F,
    x_ordered: &[f64],
    s_alphabet: &[Vec<f64>],
    eps: f64,
    ordering: &[usize],
) -> Result<LeakageReport> {
    if s_alphabet.is_empty() {
        return Err(MechanismError::EmptyAlphabet);
    }
    if eps < 0.0 || eps.is_nan() {
        return Err(MechanismError::InvalidParameter(format!(
            "eps must be >= 0, got {eps}"
        )));
    }
    let m = estimator.feature_count();
    if ordering.len() != m {
        return Err(MechanismError::ReportMismatch(format!(
            "ordering has {} entries for {} features",
            ordering.len(),
            m
        )));
    }
    let mut entries = Vec::with_capacity(m);
    for (position, &feature) in ordering.iter().enumerate() {
        let mut max_abs = 0.0f64;
        for s in s_alphabet {
            let v = cond_density_estimate(estimator, s, x_ordered, position + 1)?;
            let mag = v.abs();
            if mag > max_abs {
                max_abs = mag;
            }
        }
        entries.push(LeakageEntry {
            position,
            feature,
            max_abs_cond_density: max_abs,
            leaking: max_abs > eps,
        });
    }
    Ok(LeakageReport {
        eps,
        ordering: ordering.to_vec(),
        entries,
    })
}
