//! Numerical verifiers for the mechanism guarantees: a Monte-Carlo check
//! that the worst case over the feature domain sits at the boundary radius,
//! and an exhaustive desk-scale check of the composition theorem.

use serde::Serialize;

use super::{MechanismError, Result};
use crate::divergence::{egamma_discrete, egamma_gaussian, egamma_sup_bruteforce, ProbVector};
use crate::rng::SeedStream;

#[derive(Debug, Clone, Serialize)]
pub struct GuaranteeCheckRow {
    pub mean_gap: f64,
    pub mc_estimate: f64,
    pub std_err: f64,
    pub theta_at_k: f64,
    pub within_bound: bool,
}

/// Monte-Carlo estimate of E_{e^eps}(N(a, lambda^2 I) || N(0, lambda^2 I))
/// for a grid of gaps ||a|| <= K, via the positive-part form evaluated on
/// the known densities: E = E_{Y~P}[(1 - gamma q(Y)/p(Y))_+].
///
/// Each estimate must stay below theta_{e^eps}(K, lambda) + 3 SE, with
/// equality (within Monte-Carlo error) at ||a|| = K.
pub fn verify_feature_guarantee(
    eps: f64,
    lambda: f64,
    k_radius: f64,
    n_mc: usize,
    seed: u64,
) -> Result<Vec<GuaranteeCheckRow>> {
    if !(lambda > 0.0) || !(k_radius > 0.0) {
        return Err(MechanismError::InvalidParameter(
            "lambda and K must be positive".into(),
        ));
    }
    if n_mc < 1_000 {
        return Err(MechanismError::InvalidParameter(format!(
            "need at least 1000 Monte-Carlo draws, got {n_mc}"
        )));
    }
    let gamma = eps.exp();
    let theta_at_k = egamma_gaussian(k_radius, lambda, gamma)?;
    let mut rows = Vec::new();
    for step in 0..=4 {
        let gap = k_radius * step as f64 / 4.0;
        let mut stream = SeedStream::derive(seed, step as u64);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n_mc {
            // the log ratio only depends on the coordinate along the gap:
            // ln q(Y) - ln p(Y) = (gap^2 - 2 gap Y_1) / (2 lambda^2),
            // with Y_1 ~ N(gap, lambda^2) under P
            let y1 = gap + lambda * stream.normal();
            let log_ratio = (gap * gap - 2.0 * gap * y1) / (2.0 * lambda * lambda);
            let w = (1.0 - gamma * log_ratio.exp()).max(0.0);
            sum += w;
            sum_sq += w * w;
        }
        let mean = sum / n_mc as f64;
        let var = (sum_sq / n_mc as f64 - mean * mean).max(0.0);
        let std_err = (var / n_mc as f64).sqrt();
        rows.push(GuaranteeCheckRow {
            mean_gap: gap,
            mc_estimate: mean,
            std_err,
            theta_at_k,
            within_bound: mean <= theta_at_k + 3.0 * std_err,
        });
    }
    Ok(rows)
}

/// One random two-feature mechanism instance checked against composition.
#[derive(Debug, Clone, Serialize)]
pub struct CompositionCheck {
    /// delta/m actually achieved by the worst per-feature divergence.
    pub per_feature_level: f64,
    /// Worst composed E_{e^{2 eps}} over attribute values.
    pub composed_level: f64,
    /// composed_level - 2 * per_feature_level (positive would violate).
    pub violation: f64,
}

fn random_prob(stream: &mut SeedStream, n: usize) -> ProbVector {
    let w: Vec<f64> = (0..n).map(|_| -stream.uniform().max(1e-12).ln()).collect();
    ProbVector::from_weights(&w).expect("positive weights")
}

/// Exhaustively verifies the composition bound on random two-feature
/// discrete mechanisms: with per-feature levels E_{e^eps} <= delta/2
/// (measured, conditional on every prefix), the joint output satisfies
/// E_{e^{2 eps}}(P_{Y|s} || P_Y) <= delta. The composed divergence is
/// evaluated with both the sum form and the 2^n subset enumeration.
pub fn composition_bruteforce_check(
    n_instances: usize,
    eps: f64,
    seed: u64,
) -> Result<Vec<CompositionCheck>> {
    let mut stream = SeedStream::new(seed);
    let mut out = Vec::with_capacity(n_instances);
    for _ in 0..n_instances {
        let n_s = 2 + stream.below(2); // |S| in {2, 3}
        let n_y1 = 2 + stream.below(3); // alphabets up to 4
        let n_y2 = 2 + stream.below(3);

        let p_s = random_prob(&mut stream, n_s);
        // feature 1 mechanism: rows P_{Y1|s}
        let y1_given_s: Vec<ProbVector> =
            (0..n_s).map(|_| random_prob(&mut stream, n_y1)).collect();
        // feature 2 mechanism: rows P_{Y2|s,y1}
        let y2_given: Vec<Vec<ProbVector>> = (0..n_s)
            .map(|_| (0..n_y1).map(|_| random_prob(&mut stream, n_y2)).collect())
            .collect();

        // marginals
        let mut p_y1 = vec![0.0; n_y1];
        for (s, rows) in y1_given_s.iter().enumerate() {
            for (slot, y1) in p_y1.iter_mut().zip(0..n_y1) {
                *slot += p_s[s] * rows[y1];
            }
        }
        // P_{Y2|y1}(y2) = sum_s P(s|y1) P_{Y2|s,y1}(y2)
        let mut y2_given_y1 = vec![vec![0.0; n_y2]; n_y1];
        for (y1, cond_row) in y2_given_y1.iter_mut().enumerate() {
            for (s, per_s_rows) in y2_given.iter().enumerate() {
                let post = p_s[s] * y1_given_s[s][y1] / p_y1[y1];
                for (slot, y2) in cond_row.iter_mut().zip(0..n_y2) {
                    *slot += post * per_s_rows[y1][y2];
                }
            }
        }

        let gamma = eps.exp();
        let mut per_feature = 0.0f64;
        let p_y1_vec = ProbVector::new(p_y1.clone()).expect("marginal");
        for cond in &y1_given_s {
            per_feature = per_feature.max(egamma_discrete(cond, &p_y1_vec, gamma)?);
        }
        for per_s_rows in &y2_given {
            for (y1, cond) in per_s_rows.iter().enumerate() {
                let marg = ProbVector::from_weights(&y2_given_y1[y1]).expect("cond marginal");
                per_feature = per_feature.max(egamma_discrete(cond, &marg, gamma)?);
            }
        }

        // composed joint distributions over (y1, y2)
        let gamma2 = (2.0 * eps).exp();
        let mut composed = 0.0f64;
        let mut p_y = vec![0.0; n_y1 * n_y2];
        let mut per_s: Vec<Vec<f64>> = Vec::with_capacity(n_s);
        for s in 0..n_s {
            let mut row = vec![0.0; n_y1 * n_y2];
            for y1 in 0..n_y1 {
                for y2 in 0..n_y2 {
                    let mass = y1_given_s[s][y1] * y2_given[s][y1][y2];
                    row[y1 * n_y2 + y2] = mass;
                    p_y[y1 * n_y2 + y2] += p_s[s] * mass;
                }
            }
            per_s.push(row);
        }
        let p_y_vec = ProbVector::from_weights(&p_y).expect("output marginal");
        for row in &per_s {
            let cond = ProbVector::from_weights(row).expect("conditional output");
            let via_sum = egamma_discrete(&cond, &p_y_vec, gamma2)?;
            let via_subsets = egamma_sup_bruteforce(&cond, &p_y_vec, gamma2)?;
            if (via_sum - via_subsets).abs() > 1e-12 {
                return Err(MechanismError::NumericFailure(format!(
                    "sum form {via_sum} disagrees with subset enumeration {via_subsets}"
                )));
            }
            composed = composed.max(via_sum);
        }

        out.push(CompositionCheck {
            per_feature_level: per_feature,
            composed_level: composed,
            violation: composed - 2.0 * per_feature,
        });
    }
    Ok(out)
}
