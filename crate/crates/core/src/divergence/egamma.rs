//! E-gamma (hockey-stick) divergence: discrete sum form, subset-supremum
//! brute force, the Gaussian closed form, and the tail-integral identity.

use super::prob::ProbVector;
use super::qfunc::q_function;
use super::{DivergenceError, Result};
use crate::num::adaptive_simpson;

/// Which direction E_gamma is taken in. The guarantees in this crate are
/// stated for the forward direction E(P_cond || P_marginal); the reverse
/// controls the opposite tail and follows the same algebra with arguments
/// swapped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Direction {
    #[default]
    Forward,
    Reverse,
}

/// E_gamma(P || Q) = sum_a (P(a) - gamma Q(a))_+ for gamma >= 1.
pub fn egamma_discrete(p: &ProbVector, q: &ProbVector, gamma: f64) -> Result<f64> {
    if p.len() != q.len() {
        return Err(DivergenceError::AlphabetMismatch(p.len(), q.len()));
    }
    if !(gamma >= 1.0) {
        return Err(DivergenceError::InvalidGamma(gamma));
    }
    let mut total = 0.0;
    for i in 0..p.len() {
        let d = p[i] - gamma * q[i];
        if d > 0.0 {
            total += d;
        }
    }
    Ok(total)
}

/// Directional wrapper; `Forward` is E(P||Q), `Reverse` is E(Q||P).
pub fn egamma_discrete_directed(
    p: &ProbVector,
    q: &ProbVector,
    gamma: f64,
    dir: Direction,
) -> Result<f64> {
    match dir {
        Direction::Forward => egamma_discrete(p, q, gamma),
        Direction::Reverse => egamma_discrete(q, p, gamma),
    }
}

const MAX_BRUTEFORCE_ALPHABET: usize = 20;

/// The subset-supremum form sup_A P(A) - gamma Q(A) by enumeration of all
/// 2^n events. Must agree with [`egamma_discrete`] to 1e-12; exists as the
/// independent oracle for that identity.
pub fn egamma_sup_bruteforce(p: &ProbVector, q: &ProbVector, gamma: f64) -> Result<f64> {
    if p.len() != q.len() {
        return Err(DivergenceError::AlphabetMismatch(p.len(), q.len()));
    }
    if !(gamma >= 1.0) {
        return Err(DivergenceError::InvalidGamma(gamma));
    }
    let n = p.len();
    if n > MAX_BRUTEFORCE_ALPHABET {
        return Err(DivergenceError::AlphabetTooLarge(n, MAX_BRUTEFORCE_ALPHABET));
    }
    let mut best = 0.0f64; // empty set achieves 0
    for mask in 0u32..(1u32 << n) {
        let mut value = 0.0;
        for i in 0..n {
            if mask & (1 << i) != 0 {
                value += p[i] - gamma * q[i];
            }
        }
        if value > best {
            best = value;
        }
    }
    Ok(best)
}

/// Closed-form E_gamma between N(a, lambda^2 I) and N(0, lambda^2 I) with
/// mean gap a = ||mu_1 - mu_2||. With beta = a / lambda,
///
///   theta_gamma(a, lambda) = Q(ln(gamma)/beta - beta/2) - gamma * Q(ln(gamma)/beta + beta/2).
pub fn egamma_gaussian(mean_gap: f64, lambda: f64, gamma: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(DivergenceError::InvalidParameter(format!(
            "noise scale must be positive, got {lambda}"
        )));
    }
    if !(gamma >= 1.0) {
        return Err(DivergenceError::InvalidGamma(gamma));
    }
    if !(mean_gap >= 0.0) {
        return Err(DivergenceError::InvalidParameter(format!(
            "mean gap must be non-negative, got {mean_gap}"
        )));
    }
    if mean_gap == 0.0 {
        return Ok(0.0); // identical Gaussians: (1 - gamma)_+ = 0
    }
    let beta = mean_gap / lambda;
    let t = gamma.ln() / beta;
    let value = q_function(t - beta / 2.0) - gamma * q_function(t + beta / 2.0);
    Ok(value.max(0.0))
}

/// Tail-integral identity: E_{e^eps}(P||Q) = e^eps * int_eps^inf e^-t Pr(i > t) dt,
/// where `tail_prob(t)` is the probability (under P) that the information
/// density exceeds t. Adaptive Simpson on [eps, eps + 40]; the integrand is
/// bounded by e^(eps - t) so the truncated mass is below 1e-17.
pub fn egamma_tail_integral<F: Fn(f64) -> f64>(tail_prob: F, eps: f64) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(DivergenceError::InvalidParameter(format!(
            "threshold must be non-negative, got {eps}"
        )));
    }
    let upper = eps + 40.0;
    // contract check on a fixed grid: values in [0,1], non-increasing
    let grid_points = 256;
    let mut prev = f64::INFINITY;
    for k in 0..=grid_points {
        let t = eps + (upper - eps) * k as f64 / grid_points as f64;
        let v = tail_prob(t);
        if !(-1e-9..=1.0 + 1e-9).contains(&v) {
            return Err(DivergenceError::ContractViolation(format!(
                "tail({t}) = {v} outside [0, 1]"
            )));
        }
        if v > prev + 1e-9 {
            return Err(DivergenceError::ContractViolation(format!(
                "tail increases at t = {t}"
            )));
        }
        prev = v;
    }
    let integrand = |t: f64| (eps - t).exp() * tail_prob(t);
    Ok(adaptive_simpson(&integrand, eps, upper, 1e-9))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::{info_density_discrete, DiscreteJoint};
    use crate::rng::SeedStream;
    use proptest::prelude::*;

    fn pv(v: &[f64]) -> ProbVector {
        ProbVector::new(v.to_vec()).unwrap()
    }

    fn random_prob(stream: &mut SeedStream, n: usize) -> ProbVector {
        let w: Vec<f64> = (0..n).map(|_| -stream.uniform().max(1e-12).ln()).collect();
        ProbVector::from_weights(&w).unwrap()
    }

    #[test]
    fn identical_distributions_zero() {
        let p = pv(&[0.2, 0.3, 0.5]);
        for gamma in [1.0, 1.5, 4.0] {
            assert_eq!(egamma_discrete(&p, &p, gamma).unwrap(), 0.0);
            assert_eq!(egamma_sup_bruteforce(&p, &p, gamma).unwrap(), 0.0);
        }
    }

    #[test]
    fn hand_sums() {
        let p = pv(&[0.5, 0.5]);
        let q = pv(&[0.9, 0.1]);
        // gamma = 1 is total variation
        assert!((egamma_discrete(&p, &q, 1.0).unwrap() - 0.4).abs() < 1e-15);
        assert!((egamma_discrete(&p, &q, 2.0).unwrap() - 0.3).abs() < 1e-15);
        assert!((egamma_sup_bruteforce(&p, &q, 1.0).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn gamma_below_one_rejected() {
        let p = pv(&[0.5, 0.5]);
        assert!(egamma_discrete(&p, &p, 0.99).is_err());
        assert!(egamma_sup_bruteforce(&p, &p, 0.5).is_err());
        assert!(egamma_gaussian(1.0, 1.0, 0.9).is_err());
    }

    #[test]
    fn bruteforce_rejects_large_alphabet() {
        let mut stream = SeedStream::new(1);
        let p = random_prob(&mut stream, 21);
        let q = random_prob(&mut stream, 21);
        assert!(matches!(
            egamma_sup_bruteforce(&p, &q, 1.0),
            Err(DivergenceError::AlphabetTooLarge(21, _))
        ));
    }

    #[test]
    fn directions_differ() {
        let p = pv(&[0.5, 0.5]);
        let q = pv(&[0.9, 0.1]);
        let fwd = egamma_discrete_directed(&p, &q, 2.0, Direction::Forward).unwrap();
        let rev = egamma_discrete_directed(&p, &q, 2.0, Direction::Reverse).unwrap();
        assert!((fwd - 0.3).abs() < 1e-15);
        // reverse: (0.9 - 2*0.5)_+ + (0.1 - 2*0.5)_+ = 0
        assert_eq!(rev, 0.0);
    }

    #[test]
    fn sum_form_equals_sup_form_randomized() {
        let mut stream = SeedStream::new(99);
        for trial in 0..1000 {
            let n = 2 + stream.below(11); // alphabets up to 12
            let p = random_prob(&mut stream, n);
            let q = random_prob(&mut stream, n);
            let gamma = 1.0 + 4.0 * stream.uniform();
            let a = egamma_discrete(&p, &q, gamma).unwrap();
            let b = egamma_sup_bruteforce(&p, &q, gamma).unwrap();
            assert!((a - b).abs() < 1e-12, "trial {trial}: {a} vs {b}");
        }
    }

    #[test]
    fn gaussian_zero_gap() {
        for gamma in [1.0, 1.7, 10.0] {
            assert_eq!(egamma_gaussian(0.0, 1.0, gamma).unwrap(), 0.0);
        }
    }

    // Frozen from the Q-function oracle:
    // theta(1, 1, e^0.5)  = Q(0) - e^0.5 Q(1)
    // theta(1, 1, e^0.74) = Q(0.24) - e^0.74 Q(1.24)
    #[test]
    fn gaussian_calibration_constants() {
        let at_half = egamma_gaussian(1.0, 1.0, 0.5f64.exp()).unwrap();
        assert!((at_half - 0.238).abs() < 5e-3, "{at_half}");
        assert!((at_half - (0.5 - 0.5f64.exp() * q_function(1.0))).abs() < 1e-14);

        let at_074 = egamma_gaussian(1.0, 1.0, 0.74f64.exp()).unwrap();
        assert!((at_074 - 0.180).abs() < 5e-3, "{at_074}");
        let direct = q_function(0.74 - 0.5) - 0.74f64.exp() * q_function(0.74 + 0.5);
        assert!((at_074 - direct).abs() < 1e-14);
    }

    #[test]
    fn gaussian_invalid_parameters() {
        assert!(egamma_gaussian(1.0, 0.0, 2.0).is_err());
        assert!(egamma_gaussian(1.0, -1.0, 2.0).is_err());
        assert!(egamma_gaussian(-0.5, 1.0, 2.0).is_err());
    }

    #[test]
    fn gaussian_monotonicity_grid() {
        // non-decreasing in the gap, non-increasing in lambda
        for &gamma in &[1.0, 1.6487212707001282, 2.5] {
            let mut prev = -1.0;
            for k in 0..=20 {
                let gap = k as f64 * 0.25;
                let v = egamma_gaussian(gap, 1.0, gamma).unwrap();
                assert!(v >= prev - 1e-14, "gap monotonicity at {gap}");
                prev = v;
            }
            let mut prev = 2.0;
            for k in 1..=20 {
                let lambda = k as f64 * 0.25;
                let v = egamma_gaussian(1.0, lambda, gamma).unwrap();
                assert!(v <= prev + 1e-14, "lambda monotonicity at {lambda}");
                prev = v;
            }
        }
    }

    #[test]
    fn tail_integral_zero_tail() {
        assert_eq!(egamma_tail_integral(|_| 0.0, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn tail_integral_matches_gaussian_closed_form() {
        // N(a, lambda^2) vs N(0, lambda^2): with beta = a/lambda the density
        // ratio log is N(beta^2/2, beta^2) under the first law, so
        // Pr(i > t) = Q((t - beta^2/2) / beta).
        for (a, lambda, eps) in [(1.0, 1.0, 0.5), (0.7, 1.3, 0.2), (2.0, 1.0, 1.0)] {
            let beta: f64 = a / lambda;
            let tail = move |t: f64| q_function((t - beta * beta / 2.0) / beta);
            let via_integral = egamma_tail_integral(tail, eps).unwrap();
            let closed = egamma_gaussian(a, lambda, eps.exp()).unwrap();
            assert!(
                (via_integral - closed).abs() < 1e-3,
                "a={a} lambda={lambda} eps={eps}: {via_integral} vs {closed}"
            );
        }
    }

    #[test]
    fn tail_integral_matches_discrete_step_tail() {
        // P = [0.5, 0.5], Q = [0.9, 0.1]: density-ratio log takes values
        // ln(5/9) and ln 5 with probability 1/2 each under P.
        let p = pv(&[0.5, 0.5]);
        let q = pv(&[0.9, 0.1]);
        let lo = (0.5f64 / 0.9).ln();
        let hi = 5.0f64.ln();
        let tail = move |t: f64| {
            let mut mass = 0.0;
            if lo > t {
                mass += 0.5;
            }
            if hi > t {
                mass += 0.5;
            }
            mass
        };
        let via_integral = egamma_tail_integral(tail, 0.0).unwrap();
        let direct = egamma_discrete(&p, &q, 1.0).unwrap();
        assert!((via_integral - direct).abs() < 1e-3, "{via_integral} vs {direct}");
        assert!((direct - 0.4).abs() < 1e-15);
    }

    #[test]
    fn tail_integral_rejects_increasing_tail() {
        let bad = |t: f64| if t > 1.0 { 0.9 } else { 0.1 };
        assert!(matches!(
            egamma_tail_integral(bad, 0.0),
            Err(DivergenceError::ContractViolation(_))
        ));
    }

    // Randomized Theorem-1 style check against the generic discrete tail.
    #[test]
    fn tail_integral_matches_discrete_randomized() {
        let mut stream = SeedStream::new(2024);
        for _ in 0..20 {
            let n = 2 + stream.below(6);
            let p = random_prob(&mut stream, n);
            let q = random_prob(&mut stream, n);
            let eps = stream.uniform();
            let ratios: Vec<f64> = (0..n).map(|i| (p[i] / q[i]).ln()).collect();
            let p_owned = p.clone();
            let tail = move |t: f64| {
                (0..ratios.len())
                    .filter(|&i| ratios[i] > t)
                    .map(|i| p_owned[i])
                    .sum::<f64>()
            };
            let via_integral = egamma_tail_integral(tail, eps).unwrap();
            let closed = egamma_discrete(&p, &q, eps.exp()).unwrap();
            assert!(
                (via_integral - closed).abs() < 1e-3,
                "{via_integral} vs {closed}"
            );
        }
    }

    // Data-processing inequality for E_gamma under random channels.
    #[test]
    fn data_processing_inequality_randomized() {
        use crate::divergence::Channel;
        let mut stream = SeedStream::new(31);
        for _ in 0..300 {
            let n = 2 + stream.below(5);
            let m = 2 + stream.below(5);
            let p = random_prob(&mut stream, n);
            let q = random_prob(&mut stream, n);
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    let r = random_prob(&mut stream, m);
                    r.masses().to_vec()
                })
                .collect();
            let w = Channel::new(rows).unwrap();
            let gamma = 1.0 + 3.0 * stream.uniform();
            let before = egamma_discrete(&p, &q, gamma).unwrap();
            let after =
                egamma_discrete(&w.apply(&p).unwrap(), &w.apply(&q).unwrap(), gamma).unwrap();
            assert!(after <= before + 1e-12, "DPI violated: {after} > {before}");
        }
    }

    // Chain-rule-free sanity: E_gamma of an information-density pair taken
    // from a joint matches the definition applied to conditionals.
    #[test]
    fn egamma_of_conditionals_from_joint() {
        let j = DiscreteJoint::new(vec![vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
        let cond = j.conditional_x_given_s(0).unwrap();
        let marg = ProbVector::new(j.marginal_x()).unwrap();
        let gamma = info_density_discrete(&j, 0, 0).unwrap().exp();
        let e = egamma_discrete(&cond, &marg, gamma).unwrap();
        assert!((0.0..=1.0).contains(&e));
    }

    proptest! {
        // E_gamma lies in [0, 1] and is non-increasing in gamma.
        #[test]
        fn egamma_bounds_and_gamma_monotonicity(seed in 0u64..500) {
            let mut stream = SeedStream::new(seed);
            let n = 2 + stream.below(9);
            let p = random_prob(&mut stream, n);
            let q = random_prob(&mut stream, n);
            let mut prev = f64::INFINITY;
            for k in 0..=10 {
                let gamma = 1.0 + k as f64 * 0.5;
                let v = egamma_discrete(&p, &q, gamma).unwrap();
                prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
                prop_assert!(v <= prev + 1e-12);
                prev = v;
            }
        }

        #[test]
        fn gaussian_egamma_in_unit_interval(gap in 0.0f64..6.0, lambda in 0.05f64..4.0, eps in 0.0f64..3.0) {
            let v = egamma_gaussian(gap, lambda, eps.exp()).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}
