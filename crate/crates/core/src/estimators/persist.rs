//! Versioned JSON persistence for trained models.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::network::{Activation, FeatureLayout, TideModel};
use super::Result;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct TrainMeta {
    pub seed: u64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub final_objective_nats: f64,
    pub train_rows: usize,
    /// Empirical max feature norm over the train split (image models).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch_side: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub layer_sizes: Vec<usize>,
    pub activation: Activation,
    pub clip_bound: f64,
    pub d_s: usize,
    pub layout: FeatureLayout,
    /// Weights as decimal JSON numbers; serde_json round-trips f64 exactly.
    pub weights: Vec<f64>,
    pub output_shift: Vec<f64>,
    pub metadata: TrainMeta,
}

impl ModelFile {
    pub fn from_model(model: &TideModel, metadata: TrainMeta) -> Self {
        ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            layer_sizes: model.layer_sizes().to_vec(),
            activation: model.activation(),
            clip_bound: model.clip_bound(),
            d_s: model.d_s(),
            layout: model.layout(),
            weights: model.weights().to_vec(),
            output_shift: model.output_shift().to_vec(),
            metadata,
        }
    }

    pub fn into_model(self) -> Result<TideModel> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(super::EstimatorError::InvalidConfig(format!(
                "unsupported model format version {}",
                self.format_version
            )));
        }
        TideModel::from_parts(
            self.layer_sizes,
            self.weights,
            self.clip_bound,
            self.activation,
            self.d_s,
            self.layout,
            self.output_shift,
        )
    }
}

pub fn save_model(path: &Path, model: &TideModel, metadata: TrainMeta) -> Result<()> {
    let file = ModelFile::from_model(model, metadata);
    let json = serde_json::to_string_pretty(&file)?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<(TideModel, TrainMeta)> {
    let raw = std::fs::read_to_string(path)?;
    let file: ModelFile = serde_json::from_str(&raw)?;
    let meta = file.metadata.clone();
    Ok((file.into_model()?, meta))
}
