//! Adaptive Simpson quadrature.

/// Integrates `f` over [a, b] by recursive adaptive Simpson with absolute
/// tolerance `tol`. Handles bounded integrands with step discontinuities:
/// the recursion depth cap bounds the error contribution of any jump by
/// the final subinterval width.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::adaptive_simpson;

    #[test]
    fn integrates_polynomial_exactly() {
        // Simpson is exact on cubics
        let got = adaptive_simpson(&|t| t * t * t - 2.0 * t + 1.0, 0.0, 2.0, 1e-12);
        assert!((got - 2.0).abs() < 1e-12, "{got}");
    }

    #[test]
    fn integrates_exponential() {
        let got = adaptive_simpson(&|t: f64| (-t).exp(), 0.0, 40.0, 1e-12);
        assert!((got - 1.0).abs() < 1e-10, "{got}");
    }

    #[test]
    fn handles_step_discontinuity() {
        // integral of a step at sqrt(2) over [0, 2] is sqrt(2)
        let got = adaptive_simpson(&|t| if t < std::f64::consts::SQRT_2 { 1.0 } else { 0.0 }, 0.0, 2.0, 1e-9);
        assert!((got - std::f64::consts::SQRT_2).abs() < 1e-6, "{got}");
    }
}
