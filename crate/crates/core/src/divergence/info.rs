//! Pointwise information density and its chain rule on finite models.

use super::prob::DiscreteJoint;
use super::{DivergenceError, Result};

/// Information density i(s; x) = log P_{S,X}(s,x) - log P_S(s) - log P_X(x)
/// in nats.
///
/// A zero joint cell with positive marginals yields the -inf sentinel so
/// downstream sums over events stay well-defined; a zero marginal is a hard
/// error because the density is undefined there.
pub fn info_density_discrete(joint: &DiscreteJoint, s: usize, x: usize) -> Result<f64> {
    let ps = joint.marginal_s()[s];
    let px = joint.marginal_x()[x];
    if ps <= 0.0 {
        return Err(DivergenceError::ZeroMarginal(format!("P_S({s})")));
    }
    if px <= 0.0 {
        return Err(DivergenceError::ZeroMarginal(format!("P_X({x})")));
    }
    let p = joint.mass(s, x);
    if p == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(p.ln() - ps.ln() - px.ln())
}

/// Chain-rule increment: i(s; x_j | x^{j-1}) = i(s; x^j) - i(s; x^{j-1}).
pub fn cond_info_density(i_full: f64, i_prefix: f64) -> f64 {
    i_full - i_prefix
}

/// Exact joint over (S, X_1, ..., X_m) with small finite alphabets.
///
/// This is the exhaustive oracle behind the chain-rule, XOR, and
/// prefix-flagging tests: information densities of any feature prefix are
/// computed by direct marginalization of the table.
#[derive(Debug, Clone)]
pub struct FeatureJoint {
    /// Row-major over (s, x_1, ..., x_m), features varying fastest from the
    /// last one.
    probs: Vec<f64>,
    s_size: usize,
    feature_sizes: Vec<usize>,
}

impl FeatureJoint {
    pub fn new(probs: Vec<f64>, s_size: usize, feature_sizes: Vec<usize>) -> Result<Self> {
        let cells: usize = feature_sizes.iter().product::<usize>() * s_size;
        if probs.len() != cells {
            return Err(DivergenceError::AlphabetMismatch(probs.len(), cells));
        }
        if probs.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(DivergenceError::InvalidDistribution(
                "negative or non-finite mass".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > super::MASS_TOL {
            return Err(DivergenceError::InvalidDistribution(format!(
                "mass sums to {sum}"
            )));
        }
        Ok(FeatureJoint {
            probs,
            s_size,
            feature_sizes,
        })
    }

    /// The binary XOR construction: X1, X2 independent uniform bits and
    /// S = X1 xor X2. Unconditional densities vanish but the second feature
    /// carries everything given the first.
    pub fn xor_construction() -> Self {
        let mut probs = vec![0.0; 2 * 2 * 2];
        for x1 in 0..2usize {
            for x2 in 0..2usize {
                let s = x1 ^ x2;
                probs[(s * 2 + x1) * 2 + x2] = 0.25;
            }
        }
        FeatureJoint {
            probs,
            s_size: 2,
            feature_sizes: vec![2, 2],
        }
    }

    pub fn num_features(&self) -> usize {
        self.feature_sizes.len()
    }

    pub fn s_size(&self) -> usize {
        self.s_size
    }

    pub fn feature_sizes(&self) -> &[usize] {
        &self.feature_sizes
    }

    fn flat_index(&self, s: usize, x: &[usize]) -> usize {
        let mut idx = s;
        for (j, &size) in self.feature_sizes.iter().enumerate() {
            idx = idx * size + x[j];
        }
        idx
    }

    pub fn mass(&self, s: usize, x: &[usize]) -> f64 {
        self.probs[self.flat_index(s, x)]
    }

    /// P(s, x^j): marginal over features beyond the prefix.
    pub fn prefix_mass(&self, s: usize, x_prefix: &[usize]) -> f64 {
        let j = x_prefix.len();
        let mut total = 0.0;
        let tail_sizes = &self.feature_sizes[j..];
        let tail_cells: usize = tail_sizes.iter().product();
        let mut x = vec![0usize; self.num_features()];
        x[..j].copy_from_slice(x_prefix);
        for mut t in 0..tail_cells {
            for (k, &size) in tail_sizes.iter().enumerate().rev() {
                x[j + k] = t % size;
                t /= size;
            }
            total += self.mass(s, &x);
        }
        total
    }

    pub fn s_marginal(&self, s: usize) -> f64 {
        self.prefix_mass(s, &[])
    }

    /// P(x^j) marginalized over s.
    pub fn prefix_marginal(&self, x_prefix: &[usize]) -> f64 {
        (0..self.s_size).map(|s| self.prefix_mass(s, x_prefix)).sum()
    }

    /// i(s; x^j) in nats; -inf when P(s, x^j) = 0 with positive marginals.
    pub fn info_density_prefix(&self, s: usize, x_prefix: &[usize]) -> Result<f64> {
        if x_prefix.is_empty() {
            return Ok(0.0);
        }
        let ps = self.s_marginal(s);
        let px = self.prefix_marginal(x_prefix);
        if ps <= 0.0 {
            return Err(DivergenceError::ZeroMarginal(format!("P_S({s})")));
        }
        if px <= 0.0 {
            return Err(DivergenceError::ZeroMarginal(format!("P(x^{})", x_prefix.len())));
        }
        let p = self.prefix_mass(s, x_prefix);
        if p == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(p.ln() - ps.ln() - px.ln())
    }

    /// i(s; x_j | x^{j-1}) via the chain rule, 1-indexed j.
    pub fn cond_density(&self, s: usize, x: &[usize], j: usize) -> Result<f64> {
        let full = self.info_density_prefix(s, &x[..j])?;
        let prefix = self.info_density_prefix(s, &x[..j - 1])?;
        Ok(cond_info_density(full, prefix))
    }

    /// Flattens to a two-variable joint over (S, X^m) for divergence math.
    pub fn to_discrete_joint(&self) -> DiscreteJoint {
        let x_cells: usize = self.feature_sizes.iter().product();
        let rows = (0..self.s_size)
            .map(|s| self.probs[s * x_cells..(s + 1) * x_cells].to_vec())
            .collect();
        DiscreteJoint::new(rows).expect("flattened joint is valid")
    }
}
