//! The bounded feedforward network behind the TIDE, with hand-written
//! forward and reverse passes.
//!
//! Input layout: the attribute values, then the feature values with every
//! feature beyond the evaluation prefix zeroed, then (for prefix-trained
//! models) one channel carrying prefix_len / feature_count. The output is
//! squashed through M*tanh(z/M), a smooth saturation whose range is
//! exactly [-M, M] and whose gradient never vanishes, so hard-clip
//! semantics hold at evaluation time without killing training.

use serde::{Deserialize, Serialize};

use super::{EstimatorError, Result};
use crate::rng::SeedStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
    Elu,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
            Activation::Elu => {
                if z >= 0.0 {
                    z
                } else {
                    z.exp_m1()
                }
            }
        }
    }

    fn derivative_from_z(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Elu => {
                if z >= 0.0 {
                    1.0
                } else {
                    z.exp()
                }
            }
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = EstimatorError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            "elu" => Ok(Activation::Elu),
            other => Err(EstimatorError::InvalidConfig(format!(
                "unknown activation {other:?}"
            ))),
        }
    }
}

/// How the flat feature vector decomposes into an ordered feature sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureLayout {
    /// Number of features m in the conditioning order.
    pub feature_count: usize,
    /// Scalars per feature r; the feature vector has m * r entries.
    pub feature_dim: usize,
    /// Train with prefix masking and a prefix-length channel.
    pub prefix_training: bool,
}

impl FeatureLayout {
    pub fn flat(d_x: usize) -> Self {
        FeatureLayout {
            feature_count: 1,
            feature_dim: d_x,
            prefix_training: false,
        }
    }

    pub fn prefixed(feature_count: usize, feature_dim: usize) -> Self {
        FeatureLayout {
            feature_count,
            feature_dim,
            prefix_training: true,
        }
    }

    pub fn x_dim(&self) -> usize {
        self.feature_count * self.feature_dim
    }
}

/// Parameterized bounded function g_theta(s, x-prefix), |g| <= M.
///
/// The DV objective is invariant to additive constants, so the raw network
/// output is only the density up to a shift. Training ends with a
/// recentering step that stores, per prefix length, the log-mean-exp of the
/// raw output over product-of-marginals pairs; evaluation subtracts it,
/// which maps any shifted optimum back onto the density itself (the true
/// density satisfies E_product[e^i] = 1). Outputs are re-clamped to
/// [-M, M] after the shift so the trim invariant stays hard.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TideModel {
    layer_sizes: Vec<usize>,
    weights: Vec<f64>,
    clip_bound: f64,
    activation: Activation,
    d_s: usize,
    layout: FeatureLayout,
    /// Recentering constant per prefix length (index j-1 for prefix j).
    output_shift: Vec<f64>,
}

/// Per-call scratch space so evaluation and backprop never allocate in the
/// inner loop.
#[derive(Debug, Clone)]
pub struct Workspace {
    input: Vec<f64>,
    acts: Vec<Vec<f64>>,
    zs: Vec<Vec<f64>>,
    deltas: Vec<Vec<f64>>,
}

impl TideModel {
    /// New model with deterministic uniform Glorot initialization.
    pub fn new(
        d_s: usize,
        layout: FeatureLayout,
        hidden: &[usize],
        clip_bound: f64,
        activation: Activation,
        stream: &mut SeedStream,
    ) -> Result<Self> {
        if !(clip_bound > 0.0) {
            return Err(EstimatorError::InvalidConfig(format!(
                "clip bound must be positive, got {clip_bound}"
            )));
        }
        if hidden.contains(&0) {
            return Err(EstimatorError::InvalidConfig("zero-width layer".into()));
        }
        let input_dim = d_s + layout.x_dim() + usize::from(layout.prefix_training);
        let mut layer_sizes = Vec::with_capacity(hidden.len() + 2);
        layer_sizes.push(input_dim);
        layer_sizes.extend_from_slice(hidden);
        layer_sizes.push(1);

        let mut weights = Vec::with_capacity(Self::param_count_for(&layer_sizes));
        for l in 0..layer_sizes.len() - 1 {
            let fan_in = layer_sizes[l];
            let fan_out = layer_sizes[l + 1];
            let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for _ in 0..fan_in * fan_out {
                weights.push(stream.uniform_in(-a, a));
            }
            weights.extend(std::iter::repeat_n(0.0, fan_out));
        }
        let output_shift = vec![0.0; layout.feature_count];
        Ok(TideModel {
            layer_sizes,
            weights,
            clip_bound,
            activation,
            d_s,
            layout,
            output_shift,
        })
    }

    pub(crate) fn from_parts(
        layer_sizes: Vec<usize>,
        weights: Vec<f64>,
        clip_bound: f64,
        activation: Activation,
        d_s: usize,
        layout: FeatureLayout,
        output_shift: Vec<f64>,
    ) -> Result<Self> {
        let expected = Self::param_count_for(&layer_sizes);
        if weights.len() != expected {
            return Err(EstimatorError::DimensionMismatch {
                expected,
                got: weights.len(),
            });
        }
        let input_dim = d_s + layout.x_dim() + usize::from(layout.prefix_training);
        if layer_sizes.first().copied() != Some(input_dim) || layer_sizes.last().copied() != Some(1)
        {
            return Err(EstimatorError::InvalidConfig(
                "layer sizes do not match the input layout".into(),
            ));
        }
        if output_shift.len() != layout.feature_count {
            return Err(EstimatorError::DimensionMismatch {
                expected: layout.feature_count,
                got: output_shift.len(),
            });
        }
        Ok(TideModel {
            layer_sizes,
            weights,
            clip_bound,
            activation,
            d_s,
            layout,
            output_shift,
        })
    }

    fn param_count_for(layer_sizes: &[usize]) -> usize {
        layer_sizes
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    pub fn param_count(&self) -> usize {
        self.weights.len()
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn clip_bound(&self) -> f64 {
        self.clip_bound
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn d_s(&self) -> usize {
        self.d_s
    }

    pub fn layout(&self) -> FeatureLayout {
        self.layout
    }

    pub fn feature_count(&self) -> usize {
        self.layout.feature_count
    }

    pub fn prefix_mask_supported(&self) -> bool {
        self.layout.prefix_training
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Mutable weight access, used by gradient-checking oracles and the
    /// trainer. Layer layout: per layer, the weight matrix row-major
    /// (out x in) followed by the biases.
    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn output_shift(&self) -> &[f64] {
        &self.output_shift
    }

    pub(crate) fn set_output_shift(&mut self, prefix_len: usize, shift: f64) {
        self.output_shift[prefix_len - 1] = shift;
    }

    pub fn workspace(&self) -> Workspace {
        Workspace {
            input: vec![0.0; self.layer_sizes[0]],
            acts: self.layer_sizes.iter().map(|&n| vec![0.0; n]).collect(),
            zs: self.layer_sizes[1..].iter().map(|&n| vec![0.0; n]).collect(),
            deltas: self.layer_sizes[1..].iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    /// Writes (s, masked x, prefix channel) into the workspace input buffer.
    pub(crate) fn build_input(
        &self,
        s: &[f64],
        x: &[f64],
        prefix_len: usize,
        input: &mut [f64],
    ) -> Result<()> {
        if s.len() != self.d_s {
            return Err(EstimatorError::DimensionMismatch {
                expected: self.d_s,
                got: s.len(),
            });
        }
        let x_dim = self.layout.x_dim();
        if x.len() != x_dim {
            return Err(EstimatorError::DimensionMismatch {
                expected: x_dim,
                got: x.len(),
            });
        }
        let m = self.layout.feature_count;
        if prefix_len > m {
            return Err(EstimatorError::PrefixOutOfRange {
                got: prefix_len,
                max: m,
            });
        }
        if prefix_len < m && !self.layout.prefix_training {
            return Err(EstimatorError::PrefixUnsupported);
        }
        input[..self.d_s].copy_from_slice(s);
        let visible = prefix_len * self.layout.feature_dim;
        input[self.d_s..self.d_s + visible].copy_from_slice(&x[..visible]);
        input[self.d_s + visible..self.d_s + x_dim].fill(0.0);
        if self.layout.prefix_training {
            input[self.d_s + x_dim] = prefix_len as f64 / m as f64;
        }
        Ok(())
    }

    /// Forward pass; returns the bounded output M*tanh(z/M).
    pub(crate) fn forward(&self, ws: &mut Workspace) -> f64 {
        let act = self.activation;
        ws.acts[0].copy_from_slice(&ws.input);
        let mut off = 0;
        let n_layers = self.layer_sizes.len() - 1;
        for l in 0..n_layers {
            let fan_in = self.layer_sizes[l];
            let fan_out = self.layer_sizes[l + 1];
            let w = &self.weights[off..off + fan_in * fan_out];
            let b = &self.weights[off + fan_in * fan_out..off + fan_in * fan_out + fan_out];
            let (lower, upper) = ws.acts.split_at_mut(l + 1);
            let a_in = &lower[l];
            let a_out = &mut upper[0];
            let z_out = &mut ws.zs[l];
            for o in 0..fan_out {
                let row = &w[o * fan_in..(o + 1) * fan_in];
                let z = b[o] + dot(row, a_in);
                z_out[o] = z;
                a_out[o] = if l + 1 == n_layers { z } else { act.apply(z) };
            }
            off += fan_in * fan_out + fan_out;
        }
        let z_last = ws.zs[n_layers - 1][0];
        let m = self.clip_bound;
        m * (z_last / m).tanh()
    }

    /// Raw bounded network output, without the recentering shift. This is
    /// the quantity the DV objective and its gradient are defined on.
    pub(crate) fn raw_prefix(
        &self,
        s: &[f64],
        x: &[f64],
        prefix_len: usize,
        ws: &mut Workspace,
    ) -> Result<f64> {
        if prefix_len == 0 {
            // still validate dimensions so shape errors surface
            if s.len() != self.d_s {
                return Err(EstimatorError::DimensionMismatch {
                    expected: self.d_s,
                    got: s.len(),
                });
            }
            if x.len() != self.layout.x_dim() {
                return Err(EstimatorError::DimensionMismatch {
                    expected: self.layout.x_dim(),
                    got: x.len(),
                });
            }
            return Ok(0.0);
        }
        self.build_input(s, x, prefix_len, &mut ws.input)?;
        Ok(self.forward(ws))
    }

    /// Density estimate g(s, x^prefix) in [-M, M]. Prefix 0 is 0 by
    /// convention (the empty observation carries no information).
    pub fn eval_prefix(
        &self,
        s: &[f64],
        x: &[f64],
        prefix_len: usize,
        ws: &mut Workspace,
    ) -> Result<f64> {
        let raw = self.raw_prefix(s, x, prefix_len, ws)?;
        if prefix_len == 0 {
            return Ok(raw);
        }
        let m = self.clip_bound;
        Ok((raw - self.output_shift[prefix_len - 1]).clamp(-m, m))
    }

    /// Convenience full-feature evaluation.
    pub fn eval(&self, s: &[f64], x: &[f64]) -> Result<f64> {
        let mut ws = self.workspace();
        self.eval_prefix(s, x, self.layout.feature_count, &mut ws)
    }

    /// Reverse pass. `upstream` is d(objective)/d(output); gradients are
    /// accumulated into `grad` (same layout as `weights`). Must be called
    /// with the workspace state left by `forward`.
    pub(crate) fn backward(&self, upstream: f64, ws: &mut Workspace, grad: &mut [f64]) {
        let n_layers = self.layer_sizes.len() - 1;
        let m = self.clip_bound;
        let z_last = ws.zs[n_layers - 1][0];
        let t = (z_last / m).tanh();
        // d/dz of M*tanh(z/M)
        ws.deltas[n_layers - 1][0] = upstream * (1.0 - t * t);

        let mut offsets = Vec::with_capacity(n_layers);
        let mut off = 0;
        for l in 0..n_layers {
            offsets.push(off);
            off += self.layer_sizes[l] * self.layer_sizes[l + 1] + self.layer_sizes[l + 1];
        }

        for l in (0..n_layers).rev() {
            let fan_in = self.layer_sizes[l];
            let fan_out = self.layer_sizes[l + 1];
            let w_off = offsets[l];
            let b_off = w_off + fan_in * fan_out;

            // gradient wrt weights and biases of layer l
            for o in 0..fan_out {
                let delta = ws.deltas[l][o];
                if delta == 0.0 {
                    continue;
                }
                let g_row = &mut grad[w_off + o * fan_in..w_off + (o + 1) * fan_in];
                axpy(delta, &ws.acts[l], g_row);
                grad[b_off + o] += delta;
            }

            // propagate to the previous layer's delta (through its activation)
            if l > 0 {
                let act = self.activation;
                let w = &self.weights[w_off..b_off];
                let (prev_deltas, cur_deltas) = ws.deltas.split_at_mut(l);
                let cur = &cur_deltas[0];
                let prev = &mut prev_deltas[l - 1];
                prev.fill(0.0);
                for o in 0..fan_out {
                    let c = cur[o];
                    if c == 0.0 {
                        continue;
                    }
                    axpy(c, &w[o * fan_in..(o + 1) * fan_in], prev);
                }
                let z_prev = &ws.zs[l - 1];
                for i in 0..fan_in {
                    prev[i] *= act.derivative_from_z(z_prev[i]);
                }
            }
        }
    }
}

/// Four-lane unrolled dot product; the fixed accumulation order keeps
/// results bit-deterministic while letting the backend vectorize.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for k in 0..chunks {
        let i = 4 * k;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// out += c * xs, vectorizable elementwise update.
#[inline]
fn axpy(c: f64, xs: &[f64], out: &mut [f64]) {
    for (o, &x) in out.iter_mut().zip(xs) {
        *o += c * x;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_model(stream: &mut SeedStream) -> TideModel {
        TideModel::new(
            1,
            FeatureLayout::flat(2),
            &[8, 4],
            5.0,
            Activation::Tanh,
            stream,
        )
        .unwrap()
    }

    #[test]
    fn param_count_matches_layer_sizes() {
        let mut stream = SeedStream::new(1);
        let m = small_model(&mut stream);
        // [3, 8, 4, 1]: 3*8+8 + 8*4+4 + 4*1+1 = 32 + 36 + 5
        assert_eq!(m.param_count(), 73);
        assert_eq!(m.layer_sizes(), &[3, 8, 4, 1]);
    }

    #[test]
    fn output_is_always_bounded() {
        let mut stream = SeedStream::new(2);
        let mut m = small_model(&mut stream);
        // crank weights up to force saturation
        for w in m.weights_mut() {
            *w *= 300.0;
        }
        let mut ws = m.workspace();
        for _ in 0..200 {
            let s = [stream.normal() * 10.0];
            let x = [stream.normal() * 10.0, stream.normal() * 10.0];
            let y = m.eval_prefix(&s, &x, 1, &mut ws).unwrap();
            assert!(y.abs() <= 5.0, "output {y} escaped the clip bound");
        }
    }

    #[test]
    fn prefix_zero_returns_zero() {
        let mut stream = SeedStream::new(3);
        let m = TideModel::new(
            1,
            FeatureLayout::prefixed(2, 1),
            &[6],
            5.0,
            Activation::Tanh,
            &mut stream,
        )
        .unwrap();
        let mut ws = m.workspace();
        assert_eq!(m.eval_prefix(&[0.3], &[1.0, 2.0], 0, &mut ws).unwrap(), 0.0);
    }

    #[test]
    fn prefix_on_unmasked_model_is_rejected() {
        let mut stream = SeedStream::new(4);
        // two features but trained without prefix masking
        let unmasked = FeatureLayout {
            feature_count: 2,
            feature_dim: 1,
            prefix_training: false,
        };
        let m = TideModel::new(1, unmasked, &[4], 5.0, Activation::Tanh, &mut stream).unwrap();
        let mut ws = m.workspace();
        assert!(matches!(
            m.eval_prefix(&[0.0], &[1.0, 2.0], 1, &mut ws),
            Err(EstimatorError::PrefixUnsupported)
        ));
        // full prefix and the empty convention both work
        assert!(m.eval_prefix(&[0.0], &[1.0, 2.0], 2, &mut ws).is_ok());
        assert_eq!(m.eval_prefix(&[0.0], &[1.0, 2.0], 0, &mut ws).unwrap(), 0.0);
        // beyond the feature count is out of range
        assert!(matches!(
            m.eval_prefix(&[0.0], &[1.0, 2.0], 3, &mut ws),
            Err(EstimatorError::PrefixOutOfRange { .. })
        ));
    }

    #[test]
    fn masked_suffix_is_invisible() {
        let mut stream = SeedStream::new(5);
        let m = TideModel::new(
            1,
            FeatureLayout::prefixed(3, 2),
            &[10],
            5.0,
            Activation::Elu,
            &mut stream,
        )
        .unwrap();
        let mut ws = m.workspace();
        let s = [0.5];
        let a = m
            .eval_prefix(&s, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 1, &mut ws)
            .unwrap();
        let b = m
            .eval_prefix(&s, &[1.0, 2.0, -9.0, 9.0, -9.0, 9.0], 1, &mut ws)
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dimension_mismatch_detected() {
        let mut stream = SeedStream::new(6);
        let m = small_model(&mut stream);
        assert!(m.eval(&[0.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(m.eval(&[0.0], &[1.0]).is_err());
    }
}
