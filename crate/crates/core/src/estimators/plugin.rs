//! Plug-in estimator: log-ratio of quantized empirical distributions.

use std::collections::HashMap;

use super::sample::SampleSet;
use super::{EstimatorError, Result};

/// Additive floor keeping logs finite on unseen cells. This floor is the
/// reason the plug-in shows large WMAE on continuous data: a test point in
/// an empty cell scores ln(floor / n) and saturates the trim bound.
const CELL_FLOOR: f64 = 1e-12;

/// Empirical joint/marginal contingency tables over equal-width bins fit on
/// the train split. Sparse keyed storage so moderate dimensions stay cheap.
#[derive(Debug, Clone)]
pub struct PluginEstimator {
    bins: usize,
    s_edges: Vec<(f64, f64)>,
    x_edges: Vec<(f64, f64)>,
    joint: HashMap<Vec<u16>, u32>,
    s_counts: HashMap<Vec<u16>, u32>,
    x_counts: HashMap<Vec<u16>, u32>,
    n: usize,
}

fn column_ranges(rows: &[&[f64]], cols: usize) -> Vec<(f64, f64)> {
    let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); cols];
    for row in rows {
        for (c, &v) in row.iter().enumerate() {
            if v < ranges[c].0 {
                ranges[c].0 = v;
            }
            if v > ranges[c].1 {
                ranges[c].1 = v;
            }
        }
    }
    ranges
}

impl PluginEstimator {
    pub fn fit(data: &SampleSet, bins: usize) -> Result<Self> {
        if bins < 2 {
            return Err(EstimatorError::InvalidConfig(format!(
                "need at least 2 bins, got {bins}"
            )));
        }
        if bins > u16::MAX as usize {
            return Err(EstimatorError::InvalidConfig(format!("{bins} bins")));
        }
        let train = data.train_indices();
        if train.is_empty() {
            return Err(EstimatorError::EmptyBatch);
        }
        let s_rows: Vec<&[f64]> = train.iter().map(|&i| data.s.row(i)).collect();
        let x_rows: Vec<&[f64]> = train.iter().map(|&i| data.x.row(i)).collect();
        let s_edges = column_ranges(&s_rows, data.d_s());
        let x_edges = column_ranges(&x_rows, data.d_x());

        let mut est = PluginEstimator {
            bins,
            s_edges,
            x_edges,
            joint: HashMap::new(),
            s_counts: HashMap::new(),
            x_counts: HashMap::new(),
            n: train.len(),
        };
        for (&s_row, &x_row) in s_rows.iter().zip(&x_rows) {
            let ks = est.quantize(s_row, true);
            let kx = est.quantize(x_row, false);
            let mut kj = ks.clone();
            kj.extend_from_slice(&kx);
            *est.joint.entry(kj).or_insert(0) += 1;
            *est.s_counts.entry(ks).or_insert(0) += 1;
            *est.x_counts.entry(kx).or_insert(0) += 1;
        }
        Ok(est)
    }

    fn quantize(&self, row: &[f64], is_s: bool) -> Vec<u16> {
        let edges = if is_s { &self.s_edges } else { &self.x_edges };
        row.iter()
            .zip(edges)
            .map(|(&v, &(lo, hi))| {
                if hi <= lo {
                    return 0;
                }
                let t = ((v - lo) / (hi - lo) * self.bins as f64).floor();
                (t.clamp(0.0, (self.bins - 1) as f64)) as u16
            })
            .collect()
    }

    fn mass(&self, table: &HashMap<Vec<u16>, u32>, key: &[u16]) -> f64 {
        let count = table.get(key).copied().unwrap_or(0) as f64;
        (count + CELL_FLOOR) / self.n as f64
    }

    /// ln p(s,x) - ln p(s) - ln p(x) on the quantized grid. Out-of-range
    /// values clamp into the boundary bins.
    pub fn eval(&self, s: &[f64], x: &[f64]) -> Result<f64> {
        if s.len() != self.s_edges.len() {
            return Err(EstimatorError::DimensionMismatch {
                expected: self.s_edges.len(),
                got: s.len(),
            });
        }
        if x.len() != self.x_edges.len() {
            return Err(EstimatorError::DimensionMismatch {
                expected: self.x_edges.len(),
                got: x.len(),
            });
        }
        let ks = self.quantize(s, true);
        let kx = self.quantize(x, false);
        let mut kj = ks.clone();
        kj.extend_from_slice(&kx);
        Ok(self.mass(&self.joint, &kj).ln()
            - self.mass(&self.s_counts, &ks).ln()
            - self.mass(&self.x_counts, &kx).ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::Matrix;
    use crate::rng::SeedStream;

    fn from_pairs(pairs: &[(f64, f64)]) -> SampleSet {
        let n = pairs.len();
        let s: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let x: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        SampleSet::new(
            Matrix::new(s, n, 1).unwrap(),
            Matrix::new(x, n, 1).unwrap(),
            (0..n).collect(),
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn needs_two_bins() {
        let data = from_pairs(&[(0.0, 0.0), (1.0, 1.0)]);
        assert!(PluginEstimator::fit(&data, 1).is_err());
    }

    #[test]
    fn independent_binary_near_zero() {
        let mut stream = SeedStream::new(1);
        let pairs: Vec<(f64, f64)> = (0..20_000)
            .map(|_| {
                (
                    f64::from(stream.uniform() < 0.5),
                    f64::from(stream.uniform() < 0.5),
                )
            })
            .collect();
        let data = from_pairs(&pairs);
        let est = PluginEstimator::fit(&data, 2).unwrap();
        for s in [0.0, 1.0] {
            for x in [0.0, 1.0] {
                let v = est.eval(&[s], &[x]).unwrap();
                assert!(v.abs() < 0.05, "cell ({s},{x}) density {v}");
            }
        }
    }

    #[test]
    fn deterministic_copy_gives_ln2() {
        let pairs: Vec<(f64, f64)> = (0..1000)
            .map(|i| {
                let b = (i % 2) as f64;
                (b, b)
            })
            .collect();
        let data = from_pairs(&pairs);
        let est = PluginEstimator::fit(&data, 2).unwrap();
        let v = est.eval(&[0.0], &[0.0]).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-6, "{v}");
        // mismatched cell is empty: floored log-ratio saturates negative
        let off = est.eval(&[0.0], &[1.0]).unwrap();
        assert!(off < -20.0, "{off}");
    }

    #[test]
    fn out_of_range_clamps_into_boundary_bins() {
        let pairs: Vec<(f64, f64)> = (0..100).map(|i| (i as f64 / 100.0, 0.5)).collect();
        let data = from_pairs(&pairs);
        let est = PluginEstimator::fit(&data, 5).unwrap();
        assert!(est.eval(&[-10.0], &[0.5]).is_ok());
        assert!(est.eval(&[10.0], &[0.5]).is_ok());
    }
}
