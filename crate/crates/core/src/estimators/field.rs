//! Density fields: a common evaluation surface over trained models,
//! baselines, and exact oracles, with optional prefix conditioning.

use super::kde::KdeEstimator;
use super::network::TideModel;
use super::plugin::PluginEstimator;
use super::{EstimatorError, Result};
use crate::divergence::{FeatureJoint, GaussianFeatureModel};

/// Anything that can evaluate a (possibly prefix-conditioned) information
/// density estimate. `prefix_len` counts observed features from the front
/// of the conditioning order; 0 means nothing observed and evaluates to 0.
pub trait PrefixDensity {
    fn eval_prefix(&self, s: &[f64], x: &[f64], prefix_len: usize) -> Result<f64>;

    /// Number of features in the conditioning order.
    fn feature_count(&self) -> usize;

    /// Trim bound M when the field is bounded.
    fn bound(&self) -> Option<f64>;
}

impl PrefixDensity for TideModel {
    fn eval_prefix(&self, s: &[f64], x: &[f64], prefix_len: usize) -> Result<f64> {
        let mut ws = self.workspace();
        TideModel::eval_prefix(self, s, x, prefix_len, &mut ws)
    }

    fn feature_count(&self) -> usize {
        self.layout().feature_count
    }

    fn bound(&self) -> Option<f64> {
        Some(self.clip_bound())
    }
}

/// Exact finite-alphabet oracle, trimmed to a bound so flagging semantics
/// match what a bounded estimator could ever report. Attribute and feature
/// values are their alphabet indices as floats.
#[derive(Debug, Clone)]
pub struct DiscreteOracleField {
    joint: FeatureJoint,
    bound: f64,
}

impl DiscreteOracleField {
    pub fn new(joint: FeatureJoint, bound: f64) -> Result<Self> {
        if !(bound > 0.0) {
            return Err(EstimatorError::InvalidConfig(format!(
                "trim bound must be positive, got {bound}"
            )));
        }
        Ok(DiscreteOracleField { joint, bound })
    }

    pub fn joint(&self) -> &FeatureJoint {
        &self.joint
    }

    fn indices(&self, x: &[f64], prefix_len: usize) -> Result<Vec<usize>> {
        if x.len() != self.joint.num_features() {
            return Err(EstimatorError::DimensionMismatch {
                expected: self.joint.num_features(),
                got: x.len(),
            });
        }
        x[..prefix_len]
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let idx = v.round();
                if idx < 0.0 || idx as usize >= self.joint.feature_sizes()[j] {
                    return Err(EstimatorError::InvalidConfig(format!(
                        "feature {j} value {v} outside its alphabet"
                    )));
                }
                Ok(idx as usize)
            })
            .collect()
    }
}

impl PrefixDensity for DiscreteOracleField {
    fn eval_prefix(&self, s: &[f64], x: &[f64], prefix_len: usize) -> Result<f64> {
        if s.len() != 1 {
            return Err(EstimatorError::DimensionMismatch {
                expected: 1,
                got: s.len(),
            });
        }
        if prefix_len > self.joint.num_features() {
            return Err(EstimatorError::PrefixOutOfRange {
                got: prefix_len,
                max: self.joint.num_features(),
            });
        }
        let s_idx = s[0].round() as usize;
        let prefix = self.indices(x, prefix_len)?;
        let raw = self.joint.info_density_prefix(s_idx, &prefix)?;
        Ok(raw.clamp(-self.bound, self.bound))
    }

    fn feature_count(&self) -> usize {
        self.joint.num_features()
    }

    fn bound(&self) -> Option<f64> {
        Some(self.bound)
    }
}

/// Conditional density estimate i(s; x_j | x^{j-1}) via the chain rule on
/// prefix evaluations; bounded by 2M whenever the field is M-bounded.
pub fn cond_density_estimate<F: PrefixDensity + ?Sized>(
    field: &F,
    s: &[f64],
    x: &[f64],
    j: usize,
) -> Result<f64> {
    if j == 0 || j > field.feature_count() {
        return Err(EstimatorError::PrefixOutOfRange {
            got: j,
            max: field.feature_count(),
        });
    }
    let full = field.eval_prefix(s, x, j)?;
    let prefix = field.eval_prefix(s, x, j - 1)?;
    Ok(full - prefix)
}

/// A full-feature density evaluator tagged by provenance; the common
/// currency of the benchmark and WMAE.
pub enum DensityField {
    Tide(TideModel),
    Plugin(PluginEstimator),
    Kde(KdeEstimator),
    OracleGaussian(GaussianFeatureModel),
    OracleDiscrete(DiscreteOracleField),
    Zero,
}

impl DensityField {
    pub fn kind(&self) -> &'static str {
        match self {
            DensityField::Tide(_) => "tide",
            DensityField::Plugin(_) => "plugin",
            DensityField::Kde(_) => "kde",
            DensityField::OracleGaussian(_) | DensityField::OracleDiscrete(_) => "oracle",
            DensityField::Zero => "zero",
        }
    }

    /// Evaluates the full-feature density estimate at (s, x).
    pub fn eval(&self, s: &[f64], x: &[f64]) -> Result<f64> {
        match self {
            DensityField::Tide(m) => m.eval(s, x),
            DensityField::Plugin(p) => p.eval(s, x),
            DensityField::Kde(k) => k.eval(s, x),
            DensityField::OracleGaussian(g) => Ok(g.info_density(s, x)?),
            DensityField::OracleDiscrete(o) => {
                o.eval_prefix(s, x, o.feature_count())
            }
            DensityField::Zero => Ok(0.0),
        }
    }

    pub fn bound(&self) -> Option<f64> {
        match self {
            DensityField::Tide(m) => Some(m.clip_bound()),
            DensityField::OracleDiscrete(o) => PrefixDensity::bound(o),
            _ => None,
        }
    }
}
