//! Finite probability objects: mass vectors, two-variable joints, channels.

use super::{DivergenceError, Result, MASS_TOL};

/// Probability masses over a finite alphabet. Entries are non-negative and
/// sum to one within [`MASS_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    p: Vec<f64>,
}

impl ProbVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(DivergenceError::InvalidDistribution("empty alphabet".into()));
        }
        for (i, &v) in p.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(DivergenceError::InvalidDistribution(format!(
                    "entry {i} = {v}"
                )));
            }
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > MASS_TOL {
            return Err(DivergenceError::InvalidDistribution(format!(
                "masses sum to {sum}"
            )));
        }
        Ok(ProbVector { p })
    }

    /// Normalizes arbitrary non-negative weights.
    pub fn from_weights(w: &[f64]) -> Result<Self> {
        let sum: f64 = w.iter().sum();
        if !(sum > 0.0) {
            return Err(DivergenceError::InvalidDistribution(
                "weights sum to zero".into(),
            ));
        }
        ProbVector::new(w.iter().map(|v| v / sum).collect())
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn masses(&self) -> &[f64] {
        &self.p
    }

    /// Inverse-CDF sample given a uniform draw in [0, 1).
    pub fn sample_index(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (i, &v) in self.p.iter().enumerate() {
            acc += v;
            if u < acc {
                return i;
            }
        }
        self.p.len() - 1
    }
}

impl std::ops::Index<usize> for ProbVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.p[i]
    }
}

/// Exact finite joint distribution over (S, X), row-major with rows
/// indexed by s. Ground-truth oracle for the divergence math.
#[derive(Debug, Clone)]
pub struct DiscreteJoint {
    table: Vec<f64>,
    n_s: usize,
    n_x: usize,
}

impl DiscreteJoint {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_s = rows.len();
        if n_s == 0 {
            return Err(DivergenceError::InvalidDistribution("no rows".into()));
        }
        let n_x = rows[0].len();
        if n_x == 0 {
            return Err(DivergenceError::InvalidDistribution("no columns".into()));
        }
        let mut table = Vec::with_capacity(n_s * n_x);
        for row in &rows {
            if row.len() != n_x {
                return Err(DivergenceError::AlphabetMismatch(row.len(), n_x));
            }
            for &v in row {
                if !v.is_finite() || v < 0.0 {
                    return Err(DivergenceError::InvalidDistribution(format!(
                        "joint entry {v}"
                    )));
                }
                table.push(v);
            }
        }
        let sum: f64 = table.iter().sum();
        if (sum - 1.0).abs() > MASS_TOL {
            return Err(DivergenceError::InvalidDistribution(format!(
                "joint sums to {sum}"
            )));
        }
        Ok(DiscreteJoint { table, n_s, n_x })
    }

    /// Independent joint: outer product of two marginals.
    pub fn independent(p_s: &ProbVector, p_x: &ProbVector) -> Self {
        let mut table = Vec::with_capacity(p_s.len() * p_x.len());
        for i in 0..p_s.len() {
            for j in 0..p_x.len() {
                table.push(p_s[i] * p_x[j]);
            }
        }
        DiscreteJoint {
            table,
            n_s: p_s.len(),
            n_x: p_x.len(),
        }
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn mass(&self, s: usize, x: usize) -> f64 {
        self.table[s * self.n_x + x]
    }

    pub fn marginal_s(&self) -> Vec<f64> {
        self.table.chunks(self.n_x).map(|row| row.iter().sum()).collect()
    }

    pub fn marginal_x(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.n_x];
        for row in self.table.chunks(self.n_x) {
            for (slot, &v) in m.iter_mut().zip(row) {
                *slot += v;
            }
        }
        m
    }

    /// P(x | s) as a probability vector. Errors when P_S(s) = 0.
    pub fn conditional_x_given_s(&self, s: usize) -> Result<ProbVector> {
        let ps = self.marginal_s()[s];
        if ps <= 0.0 {
            return Err(DivergenceError::ZeroMarginal(format!("P_S({s})")));
        }
        ProbVector::new((0..self.n_x).map(|x| self.mass(s, x) / ps).collect())
    }

    /// Mutual information E[i(S;X)] in nats.
    pub fn mutual_information(&self) -> f64 {
        let ms = self.marginal_s();
        let mx = self.marginal_x();
        let mut mi = 0.0;
        for (s, &p_s) in ms.iter().enumerate() {
            for (x, &p_x) in mx.iter().enumerate() {
                let p = self.mass(s, x);
                if p > 0.0 {
                    mi += p * (p / (p_s * p_x)).ln();
                }
            }
        }
        mi
    }
}

/// Row-stochastic post-processing kernel mapping one finite alphabet to
/// another. Each row is a valid probability vector.
#[derive(Debug, Clone)]
pub struct Channel {
    rows: Vec<ProbVector>,
    n_out: usize,
}

impl Channel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(DivergenceError::InvalidDistribution("empty channel".into()));
        }
        let n_out = rows[0].len();
        let rows = rows
            .into_iter()
            .map(|r| {
                if r.len() != n_out {
                    return Err(DivergenceError::AlphabetMismatch(r.len(), n_out));
                }
                ProbVector::new(r)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Channel { rows, n_out })
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                let mut r = vec![0.0; n];
                r[i] = 1.0;
                ProbVector::new(r).expect("identity row")
            })
            .collect();
        Channel { rows, n_out: n }
    }

    pub fn n_in(&self) -> usize {
        self.rows.len()
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn row(&self, i: usize) -> &ProbVector {
        &self.rows[i]
    }

    /// Push-forward of an input distribution through the channel.
    pub fn apply(&self, p: &ProbVector) -> Result<ProbVector> {
        if p.len() != self.rows.len() {
            return Err(DivergenceError::AlphabetMismatch(p.len(), self.rows.len()));
        }
        let mut out = vec![0.0; self.n_out];
        for (i, row) in self.rows.iter().enumerate() {
            let w = p[i];
            for j in 0..self.n_out {
                out[j] += w * row[j];
            }
        }
        // renormalize away accumulated rounding so the output passes the
        // simplex invariant
        ProbVector::from_weights(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prob_vector_rejects_bad_mass() {
        assert!(ProbVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbVector::new(vec![-0.1, 1.1]).is_err());
        assert!(ProbVector::new(vec![]).is_err());
        assert!(ProbVector::new(vec![0.25; 4]).is_ok());
    }

    #[test]
    fn joint_marginals() {
        let j = DiscreteJoint::new(vec![vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
        assert_eq!(j.marginal_s(), vec![0.5, 0.5]);
        assert_eq!(j.marginal_x(), vec![0.5, 0.5]);
    }

    #[test]
    fn independent_joint_mi_zero() {
        let p = ProbVector::new(vec![0.3, 0.7]).unwrap();
        let q = ProbVector::new(vec![0.2, 0.5, 0.3]).unwrap();
        let j = DiscreteJoint::independent(&p, &q);
        assert!(j.mutual_information().abs() < 1e-14);
    }

    #[test]
    fn channel_apply_preserves_mass() {
        let w = Channel::new(vec![vec![0.5, 0.5], vec![0.1, 0.9]]).unwrap();
        let p = ProbVector::new(vec![0.25, 0.75]).unwrap();
        let out = w.apply(&p).unwrap();
        assert!((out.masses().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((out[0] - (0.25 * 0.5 + 0.75 * 0.1)).abs() < 1e-12);
    }

    #[test]
    fn sample_index_hits_support() {
        let p = ProbVector::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(p.sample_index(0.3), 1);
        assert_eq!(p.sample_index(0.999999), 1);
    }
}
