//! Monte-Carlo verifier for the information-density concentration bound
//! Pr{ i(s; X) > t } <= e^-t.
//!
//! The probability is taken under the unconditional feature marginal
//! X ~ P_X: for the event A_t = { x : i(s; x) > t } one has
//! P_X(x) < e^-t P_{X|s}(x) pointwise on A_t, hence P_X(A_t) <= e^-t.
//! Under the conditional law P_{X|s} the bound is false in general (a
//! perfectly correlated binary pair already violates it), so the sampler
//! here always draws from P_X.

use serde::Serialize;

use super::gaussian::GaussianFeatureModel;
use super::info::info_density_discrete;
use super::prob::{DiscreteJoint, ProbVector};
use super::Result;
use crate::num::wilson_interval;
use crate::rng::SeedStream;

/// 95% two-sided Wilson score.
const WILSON_Z: f64 = 1.959963984540054;

#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationRow {
    pub t: f64,
    pub empirical_tail: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bound: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationReport {
    pub rows: Vec<ConcentrationRow>,
    pub n_samples: usize,
}

impl ConcentrationReport {
    pub fn any_violation(&self) -> bool {
        self.rows.iter().any(|r| r.violated)
    }

    /// CSV rows (t, empirical_tail, ci_low, ci_high, bound).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,empirical_tail,ci_low,ci_high,bound\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.t, r.empirical_tail, r.ci_low, r.ci_high, r.bound
            ));
        }
        out
    }

    fn from_counts(t_grid: &[f64], counts: &[u64], n: usize) -> Self {
        let rows = t_grid
            .iter()
            .zip(counts)
            .map(|(&t, &k)| {
                let (lo, hi) = wilson_interval(k, n as u64, WILSON_Z);
                let bound = (-t).exp();
                ConcentrationRow {
                    t,
                    empirical_tail: k as f64 / n as f64,
                    ci_low: lo,
                    ci_high: hi,
                    bound,
                    violated: lo > bound,
                }
            })
            .collect();
        ConcentrationReport {
            rows,
            n_samples: n,
        }
    }
}

/// Gaussian model check at a fixed attribute vector `s`, sampling
/// X ~ N(0, I_d).
pub fn concentration_check_gaussian(
    model: &GaussianFeatureModel,
    s: &[f64],
    t_grid: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    let mut stream = SeedStream::new(seed);
    let mut counts = vec![0u64; t_grid.len()];
    let mut x = vec![0.0; model.dim()];
    for _ in 0..n_samples {
        stream.fill_normal(&mut x);
        let dens = model.info_density(s, &x)?;
        for (slot, &t) in counts.iter_mut().zip(t_grid) {
            if dens > t {
                *slot += 1;
            }
        }
    }
    Ok(ConcentrationReport::from_counts(t_grid, &counts, n_samples))
}

/// Discrete model check at attribute index `s`, sampling X ~ P_X.
pub fn concentration_check_discrete(
    joint: &DiscreteJoint,
    s: usize,
    t_grid: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    let mut stream = SeedStream::new(seed);
    let marg_x = ProbVector::new(joint.marginal_x())?;
    // precompute densities per symbol; -inf never exceeds a finite t
    let dens: Vec<f64> = (0..joint.n_x())
        .map(|x| info_density_discrete(joint, s, x))
        .collect::<Result<_>>()?;
    let mut counts = vec![0u64; t_grid.len()];
    for _ in 0..n_samples {
        let x = marg_x.sample_index(stream.uniform());
        for (slot, &t) in counts.iter_mut().zip(t_grid) {
            if dens[x] > t {
                *slot += 1;
            }
        }
    }
    Ok(ConcentrationReport::from_counts(t_grid, &counts, n_samples))
}
