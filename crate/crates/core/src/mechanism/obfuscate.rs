//! The sequential additive Gaussian mechanism.

use super::report::LeakageReport;
use super::{MechanismError, Result};
use crate::rng::SeedStream;

/// Adds lambda-scaled i.i.d. standard normal noise, coordinate-wise, to
/// every feature the report flags; unflagged features pass through
/// bit-identically. `x_ordered` is the flat feature sequence in the
/// report's conditioning order with `feature_dim` scalars per feature.
///
/// `clamp` optionally restricts the output to the feature domain; that is
/// post-processing and can only reduce the E-gamma leakage, but the formal
/// certificate is stated for the unclamped mechanism.
pub fn obfuscate(
    x_ordered: &[f64],
    feature_dim: usize,
    report: &LeakageReport,
    lambda: f64,
    seed: u64,
    clamp: Option<(f64, f64)>,
) -> Result<Vec<f64>> {
    if !(lambda > 0.0) {
        return Err(MechanismError::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if feature_dim == 0 {
        return Err(MechanismError::InvalidParameter(
            "feature_dim must be >= 1".into(),
        ));
    }
    let m = report.entries.len();
    if x_ordered.len() != m * feature_dim {
        return Err(MechanismError::ReportMismatch(format!(
            "feature sequence has {} scalars, report covers {} features of dim {}",
            x_ordered.len(),
            m,
            feature_dim
        )));
    }
    let mut out = x_ordered.to_vec();
    let mut stream = SeedStream::new(seed);
    for entry in &report.entries {
        if !entry.leaking {
            continue;
        }
        let start = entry.position * feature_dim;
        for v in &mut out[start..start + feature_dim] {
            *v += lambda * stream.normal();
        }
    }
    if let Some((lo, hi)) = clamp {
        for v in &mut out {
            *v = v.clamp(lo, hi);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanism::report::{LeakageEntry, LeakageReport};
    use crate::num::sample_variance;

    fn report_with_flags(flags: &[bool]) -> LeakageReport {
        LeakageReport {
            eps: 0.5,
            ordering: (0..flags.len()).collect(),
            entries: flags
                .iter()
                .enumerate()
                .map(|(position, &leaking)| LeakageEntry {
                    position,
                    feature: position,
                    max_abs_cond_density: if leaking { 1.0 } else { 0.0 },
                    leaking,
                })
                .collect(),
        }
    }

    #[test]
    fn empty_leaking_set_is_identity() {
        let x: Vec<f64> = (0..12).map(|i| i as f64 * 0.25).collect();
        let report = report_with_flags(&[false, false, false]);
        let y = obfuscate(&x, 4, &report, 1.0, 99, None).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn same_seed_same_output() {
        let x = vec![0.5; 8];
        let report = report_with_flags(&[true, false]);
        let a = obfuscate(&x, 4, &report, 1.0, 7, None).unwrap();
        let b = obfuscate(&x, 4, &report, 1.0, 7, None).unwrap();
        assert_eq!(a, b);
        let c = obfuscate(&x, 4, &report, 1.0, 8, None).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn unflagged_features_pass_through_bit_exact() {
        let x: Vec<f64> = (0..8).map(|i| (i as f64).sin()).collect();
        let report = report_with_flags(&[true, false]);
        let y = obfuscate(&x, 4, &report, 2.0, 3, None).unwrap();
        assert_eq!(&x[4..], &y[4..]);
        assert_ne!(&x[..4], &y[..4]);
    }

    // All features flagged at lambda = 1: the added noise is standard
    // normal per coordinate.
    #[test]
    fn noise_moments_match() {
        let n_features = 5_000;
        let dim = 4;
        let x = vec![0.0; n_features * dim];
        let report = report_with_flags(&vec![true; n_features]);
        let y = obfuscate(&x, dim, &report, 1.0, 42, None).unwrap();
        let noise: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        assert_eq!(noise.len(), 20_000);
        let var = sample_variance(&noise);
        assert!((var - 1.0).abs() < 0.05, "variance {var}");
        let mean = noise.iter().sum::<f64>() / noise.len() as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn clamp_restricts_range() {
        let x = vec![0.5; 4];
        let report = report_with_flags(&[true]);
        let y = obfuscate(&x, 4, &report, 10.0, 5, Some((0.0, 1.0))).unwrap();
        assert!(y.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn shape_mismatch_is_error() {
        let report = report_with_flags(&[true, true]);
        assert!(matches!(
            obfuscate(&[0.0; 7], 4, &report, 1.0, 1, None),
            Err(MechanismError::ReportMismatch(_))
        ));
    }
}
