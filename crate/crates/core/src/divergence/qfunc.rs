//! Standard normal upper-tail probability.

use crate::num::erfc;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Q(v) = Pr(N(0,1) >= v) = erfc(v / sqrt 2) / 2.
///
/// Inherits the msun erfc accuracy (< 1 ulp per branch), so the absolute
/// error stays far below 1e-10 over |v| <= 8.
pub fn q_function(v: f64) -> f64 {
    0.5 * erfc(v * FRAC_1_SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::q_function;
    use crate::num::adaptive_simpson;

    /// Independent oracle: high-precision quadrature of the normal pdf over
    /// [v, v + 60]; the truncated mass beyond is < 1e-200 for |v| <= 8.
    fn q_by_quadrature(v: f64) -> f64 {
        let pdf = |t: f64| (-(t * t) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        adaptive_simpson(&pdf, v, v + 60.0, 1e-14)
    }

    #[test]
    fn q_at_zero_is_half() {
        assert_eq!(q_function(0.0), 0.5);
    }

    #[test]
    fn q_at_one_matches_quadrature() {
        let got = q_function(1.0);
        assert!((got - 0.15865525393145707).abs() < 1e-12);
        assert!((got - q_by_quadrature(1.0)).abs() < 1e-12);
    }

    #[test]
    fn symmetry_identity() {
        for v in [-3.0, -1.0, -0.2, 0.4, 1.7, 5.0] {
            assert!((q_function(v) + q_function(-v) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_quadrature_over_grid() {
        let mut v = -8.0;
        while v <= 8.0 {
            let got = q_function(v);
            let want = q_by_quadrature(v);
            assert!(
                (got - want).abs() <= 1e-10,
                "Q({v}) = {got}, quadrature {want}"
            );
            v += 0.25;
        }
    }

    #[test]
    fn monotone_decreasing() {
        let mut prev = q_function(-8.0);
        let mut v = -7.9;
        while v <= 8.0 {
            let cur = q_function(v);
            assert!(cur < prev, "Q not decreasing at {v}");
            prev = cur;
            v += 0.1;
        }
    }
}
