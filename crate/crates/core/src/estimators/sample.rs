//! Sample containers for estimator training and evaluation.

use super::{EstimatorError, Result};
use crate::rng::SeedStream;

/// Dense row-major matrix of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl Matrix {
    pub fn new(data: Vec<f64>, rows: usize, cols: usize) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(EstimatorError::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Matrix { data, rows, cols })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            data: vec![0.0; rows * cols],
            rows,
            cols,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Paired attribute/feature samples with a train/test partition.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub s: Matrix,
    pub x: Matrix,
    train_idx: Vec<usize>,
    test_idx: Vec<usize>,
}

impl SampleSet {
    /// Builds a sample set with an explicit split. The split must use
    /// disjoint indices that together cover every row.
    pub fn new(s: Matrix, x: Matrix, train_idx: Vec<usize>, test_idx: Vec<usize>) -> Result<Self> {
        if s.rows() != x.rows() {
            return Err(EstimatorError::InvalidSampleSet(format!(
                "attribute rows {} != feature rows {}",
                s.rows(),
                x.rows()
            )));
        }
        let n = s.rows();
        let mut seen = vec![false; n];
        for &i in train_idx.iter().chain(test_idx.iter()) {
            if i >= n {
                return Err(EstimatorError::InvalidSampleSet(format!(
                    "split index {i} out of range {n}"
                )));
            }
            if seen[i] {
                return Err(EstimatorError::InvalidSampleSet(format!(
                    "split index {i} appears twice"
                )));
            }
            seen[i] = true;
        }
        if seen.iter().any(|&b| !b) {
            return Err(EstimatorError::InvalidSampleSet(
                "split does not cover all rows".into(),
            ));
        }
        Ok(SampleSet {
            s,
            x,
            train_idx,
            test_idx,
        })
    }

    /// Random train/test split by fraction, deterministic in the stream.
    pub fn with_random_split(
        s: Matrix,
        x: Matrix,
        train_fraction: f64,
        stream: &mut SeedStream,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&train_fraction) {
            return Err(EstimatorError::InvalidConfig(format!(
                "train fraction {train_fraction} outside [0, 1]"
            )));
        }
        let n = s.rows();
        let perm = stream.permutation(n);
        let n_train = ((n as f64) * train_fraction).round() as usize;
        let train_idx = perm[..n_train].to_vec();
        let test_idx = perm[n_train..].to_vec();
        SampleSet::new(s, x, train_idx, test_idx)
    }

    pub fn len(&self) -> usize {
        self.s.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn d_s(&self) -> usize {
        self.s.cols()
    }

    pub fn d_x(&self) -> usize {
        self.x.cols()
    }

    pub fn train_indices(&self) -> &[usize] {
        &self.train_idx
    }

    pub fn test_indices(&self) -> &[usize] {
        &self.test_idx
    }
}
