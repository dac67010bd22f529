//! Correlated standard-normal feature model and its closed-form
//! information density.

use super::{DivergenceError, Result};

/// A d-dimensional pair (S, X) of standard normal vectors with
/// corr(S_i, X_j) = rho when i = j and 0 otherwise. All marginals are
/// standard normal, so coordinates contribute independently.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianFeatureModel {
    d: usize,
    rho: f64,
}

impl GaussianFeatureModel {
    pub fn new(d: usize, rho: f64) -> Result<Self> {
        if d == 0 {
            return Err(DivergenceError::InvalidModel("dimension must be >= 1".into()));
        }
        if !rho.is_finite() || rho.abs() >= 1.0 {
            return Err(DivergenceError::InvalidModel(format!(
                "correlation must lie in (-1, 1), got {rho}"
            )));
        }
        Ok(GaussianFeatureModel { d, rho })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Closed-form i(s; x) in nats. Per coordinate k the bivariate pair
    /// contributes
    ///   -0.5 ln(1 - rho^2) - [rho^2 (s_k^2 + x_k^2) - 2 rho s_k x_k] / (2 (1 - rho^2))
    /// and the total is the sum over k.
    pub fn info_density(&self, s: &[f64], x: &[f64]) -> Result<f64> {
        if s.len() != self.d {
            return Err(DivergenceError::DimensionMismatch {
                expected: self.d,
                got: s.len(),
            });
        }
        if x.len() != self.d {
            return Err(DivergenceError::DimensionMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        let r = self.rho;
        if r == 0.0 {
            return Ok(0.0);
        }
        let one_minus_r2 = 1.0 - r * r;
        let log_det = -0.5 * one_minus_r2.ln();
        let mut total = 0.0;
        for k in 0..self.d {
            let quad = r * r * (s[k] * s[k] + x[k] * x[k]) - 2.0 * r * s[k] * x[k];
            total += log_det - quad / (2.0 * one_minus_r2);
        }
        Ok(total)
    }

    /// I(S; X) = -d/2 ln(1 - rho^2) in nats.
    pub fn mutual_information(&self) -> f64 {
        -(self.d as f64) * 0.5 * (1.0 - self.rho * self.rho).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent numeric oracle: evaluate the log pdf ratio directly from
    // the bivariate normal density formulas.
    fn pdf_ratio_oracle(rho: f64, s: f64, x: f64) -> f64 {
        let det = 1.0 - rho * rho;
        let log_joint = -(2.0 * std::f64::consts::PI * det.sqrt()).ln()
            - (s * s - 2.0 * rho * s * x + x * x) / (2.0 * det);
        let log_prod = -(2.0 * std::f64::consts::PI).ln() - (s * s + x * x) / 2.0;
        log_joint - log_prod
    }

    #[test]
    fn rejects_degenerate_correlation() {
        assert!(GaussianFeatureModel::new(1, 1.0).is_err());
        assert!(GaussianFeatureModel::new(1, -1.2).is_err());
        assert!(GaussianFeatureModel::new(0, 0.5).is_err());
    }

    #[test]
    fn independence_gives_zero() {
        let m = GaussianFeatureModel::new(3, 0.0).unwrap();
        assert_eq!(m.info_density(&[1.0, -2.0, 0.3], &[0.5, 0.5, 0.5]).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_matches_pdf_ratio_oracle() {
        let mut stream = crate::rng::SeedStream::new(5);
        for &rho in &[0.1, 0.3, 0.5, 0.8, -0.6] {
            let m = GaussianFeatureModel::new(1, rho).unwrap();
            for _ in 0..200 {
                let s = stream.normal() * 2.0;
                let x = stream.normal() * 2.0;
                let got = m.info_density(&[s], &[x]).unwrap();
                let want = pdf_ratio_oracle(rho, s, x);
                assert!(
                    (got - want).abs() < 1e-12,
                    "rho={rho} s={s} x={x}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn frozen_values_rho_half() {
        let m = GaussianFeatureModel::new(1, 0.5).unwrap();
        let at_origin = m.info_density(&[0.0], &[0.0]).unwrap();
        assert!((at_origin - 0.14384103622589045).abs() < 1e-12);
        assert!((at_origin - pdf_ratio_oracle(0.5, 0.0, 0.0)).abs() < 1e-12);

        let opposed = m.info_density(&[1.0], &[-1.0]).unwrap();
        assert!((opposed - (0.14384103622589045 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn multi_dimension_sums_coordinates() {
        let m1 = GaussianFeatureModel::new(1, 0.4).unwrap();
        let m3 = GaussianFeatureModel::new(3, 0.4).unwrap();
        let s = [0.7, -1.1, 0.2];
        let x = [0.1, 0.9, -0.5];
        let total = m3.info_density(&s, &x).unwrap();
        let sum: f64 = (0..3)
            .map(|k| m1.info_density(&[s[k]], &[x[k]]).unwrap())
            .sum();
        assert!((total - sum).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_closed_form() {
        let m = GaussianFeatureModel::new(1, 0.5).unwrap();
        assert!((m.mutual_information() - 0.14384103622589045).abs() < 1e-14);
        let m10 = GaussianFeatureModel::new(10, 0.5).unwrap();
        assert!((m10.mutual_information() - 1.4384103622589045).abs() < 1e-12);
    }
}
