//! Raster images, patch-grid feature extraction, and the image
//! obfuscation driver.

use serde::{Deserialize, Serialize};

use super::{PipelineError, Result};
use crate::estimators::{
    tide_train, FeatureLayout, Matrix, SampleSet, TideModel, TrainConfig,
    TrainReport,
};
use crate::mechanism::{identify_leaking, leakage_bound, obfuscate, GuaranteeCertificate,
    LeakageReport, MechanismConfig};
use crate::rng::SeedStream;

/// Grayscale (1 channel) or RGB (3 channels, interleaved) image with
/// intensities in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RasterImage {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub pixels: Vec<f64>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, channels: usize, pixels: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(PipelineError::InvalidImage(format!(
                "{channels} channels (must be 1 or 3)"
            )));
        }
        if pixels.len() != width * height * channels {
            return Err(PipelineError::InvalidImage(format!(
                "{} pixels for {}x{}x{}",
                pixels.len(),
                width,
                height,
                channels
            )));
        }
        if pixels.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(PipelineError::InvalidImage(
                "intensities must lie in [0, 1]".into(),
            ));
        }
        Ok(RasterImage {
            width,
            height,
            channels,
            pixels,
        })
    }

    pub fn zeros(width: usize, height: usize, channels: usize) -> Self {
        RasterImage {
            width,
            height,
            channels,
            pixels: vec![0.0; width * height * channels],
        }
    }

    pub fn get(&self, row: usize, col: usize, channel: usize) -> f64 {
        self.pixels[(row * self.width + col) * self.channels + channel]
    }

    pub fn set(&mut self, row: usize, col: usize, channel: usize, v: f64) {
        self.pixels[(row * self.width + col) * self.channels + channel] = v;
    }
}

/// Square patch-grid decomposition in raster order (upper-left to
/// lower-right). The side length must divide both image dimensions.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PatchSpec {
    pub side: usize,
}

impl PatchSpec {
    pub fn validate(&self, img: &RasterImage) -> Result<()> {
        if self.side == 0 || self.side > img.width || self.side > img.height {
            return Err(PipelineError::PatchMismatch(format!(
                "patch side {} vs image {}x{}",
                self.side, img.width, img.height
            )));
        }
        if !img.width.is_multiple_of(self.side) || !img.height.is_multiple_of(self.side) {
            return Err(PipelineError::PatchMismatch(format!(
                "patch side {} does not divide {}x{}",
                self.side, img.width, img.height
            )));
        }
        Ok(())
    }

    pub fn grid(&self, img: &RasterImage) -> (usize, usize) {
        (img.height / self.side, img.width / self.side)
    }

    pub fn num_patches(&self, img: &RasterImage) -> usize {
        let (rows, cols) = self.grid(img);
        rows * cols
    }

    /// Scalars per patch.
    pub fn feature_dim(&self, channels: usize) -> usize {
        channels * self.side * self.side
    }
}

/// Flattens the image into raster-ordered patch features; each patch is its
/// pixels row-major, channels interleaved.
pub fn image_to_features(img: &RasterImage, spec: &PatchSpec) -> Result<Vec<f64>> {
    spec.validate(img)?;
    let (grid_rows, grid_cols) = spec.grid(img);
    let p = spec.side;
    let mut out = Vec::with_capacity(img.pixels.len());
    for gr in 0..grid_rows {
        for gc in 0..grid_cols {
            for r in 0..p {
                for c in 0..p {
                    for ch in 0..img.channels {
                        out.push(img.get(gr * p + r, gc * p + c, ch));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Inverse of [`image_to_features`]; values are taken as-is (callers clamp
/// for display copies).
pub fn patches_to_image(
    features: &[f64],
    width: usize,
    height: usize,
    channels: usize,
    spec: &PatchSpec,
) -> Result<RasterImage> {
    let mut img = RasterImage::zeros(width, height, channels);
    if features.len() != width * height * channels {
        return Err(PipelineError::PatchMismatch(format!(
            "{} feature scalars for {}x{}x{}",
            features.len(),
            width,
            height,
            channels
        )));
    }
    spec.validate(&img)?;
    let (grid_rows, grid_cols) = spec.grid(&img);
    let p = spec.side;
    let mut k = 0;
    for gr in 0..grid_rows {
        for gc in 0..grid_cols {
            for r in 0..p {
                for c in 0..p {
                    for ch in 0..channels {
                        img.set(gr * p + r, gc * p + c, ch, features[k]);
                        k += 1;
                    }
                }
            }
        }
    }
    Ok(img)
}

/// Per-patch pooled summary: each patch is split into pool x pool blocks
/// whose means become the model-input features (channels kept separate).
/// `pool` must divide the patch side.
pub fn pool_patches(
    features: &[f64],
    spec: &PatchSpec,
    channels: usize,
    pool: usize,
) -> Result<Vec<f64>> {
    let p = spec.side;
    if pool == 0 || !p.is_multiple_of(pool) {
        return Err(PipelineError::PatchMismatch(format!(
            "pool {pool} does not divide patch side {p}"
        )));
    }
    let r = spec.feature_dim(channels);
    if !features.len().is_multiple_of(r) {
        return Err(PipelineError::PatchMismatch(format!(
            "{} scalars is not a whole number of patches of dim {r}",
            features.len()
        )));
    }
    let m = features.len() / r;
    let block = p / pool;
    let mut out = Vec::with_capacity(m * channels * pool * pool);
    for patch in 0..m {
        let base = patch * r;
        for br in 0..pool {
            for bc in 0..pool {
                for ch in 0..channels {
                    let mut acc = 0.0;
                    for r_in in 0..block {
                        for c_in in 0..block {
                            let row = br * block + r_in;
                            let col = bc * block + c_in;
                            acc += features[base + (row * p + col) * channels + ch];
                        }
                    }
                    out.push(acc / (block * block) as f64);
                }
            }
        }
    }
    Ok(out)
}

/// A patch model trained on an image corpus, with the sample set view and
/// the empirical feature radius (max raw-patch norm over the train split),
/// which is the K that enters certificates.
pub struct PatchModel {
    pub model: TideModel,
    pub report: TrainReport,
    pub data: SampleSet,
    pub empirical_k: f64,
}

/// Training hyperparameters for patch models on desk-scale image corpora.
/// Higher rates destabilize the mixed-prefix objective on small corpora.
pub fn patch_train_config(seed: u64) -> TrainConfig {
    TrainConfig {
        epochs: 400,
        batch_size: 128,
        learning_rate: 0.01,
        seed,
        ..TrainConfig::default()
    }
}

/// Trains a prefix-masked TIDE on pooled patch features of an image
/// corpus (70/30 split derived from the config seed).
pub fn train_patch_model(
    images: &[RasterImage],
    labels: &[u8],
    spec: &PatchSpec,
    pool: usize,
    trim_bound: f64,
    config: &TrainConfig,
) -> Result<PatchModel> {
    if images.is_empty() || images.len() != labels.len() {
        return Err(PipelineError::InvalidSpec(format!(
            "{} images vs {} labels",
            images.len(),
            labels.len()
        )));
    }
    let first = &images[0];
    spec.validate(first)?;
    let m = spec.num_patches(first);
    let raw_dim = spec.feature_dim(first.channels);
    let mut pooled_rows = Vec::new();
    for img in images {
        if (img.width, img.height, img.channels) != (first.width, first.height, first.channels) {
            return Err(PipelineError::PatchMismatch(
                "corpus images must share dimensions".into(),
            ));
        }
        let features = image_to_features(img, spec)?;
        pooled_rows.extend(pool_patches(&features, spec, img.channels, pool)?);
    }
    let pooled_dim = m * first.channels * pool * pool;
    let n = images.len();
    let s = Matrix::new(labels.iter().map(|&l| l as f64).collect(), n, 1)?;
    let x = Matrix::new(pooled_rows, n, pooled_dim)?;
    let mut split_stream = SeedStream::derive(config.seed, 0xface);
    let data = SampleSet::with_random_split(s, x, 0.7, &mut split_stream)?;
    // K from the train split only
    let train_set: std::collections::HashSet<usize> =
        data.train_indices().iter().copied().collect();
    let mut k_train = 0.0f64;
    for (i, img) in images.iter().enumerate() {
        if !train_set.contains(&i) {
            continue;
        }
        let features = image_to_features(img, spec)?;
        for patch in features.chunks(raw_dim) {
            let norm = patch.iter().map(|v| v * v).sum::<f64>().sqrt();
            k_train = k_train.max(norm);
        }
    }
    let layout = FeatureLayout::prefixed(m, first.channels * pool * pool);
    let (model, report) = tide_train(&data, layout, &[100, 50, 50], trim_bound, config)?;
    Ok(PatchModel {
        model,
        report,
        data,
        empirical_k: k_train,
    })
}

/// Everything the image mechanism produces for one input.
pub struct ObfuscationOutput {
    /// Mechanism output clamped into [0, 1] for display and file output.
    pub clamped: RasterImage,
    /// Raw unclamped mechanism output in patch-feature layout.
    pub raw_features: Vec<f64>,
    /// Per-patch max |conditional density| normalized to [0, 1].
    pub heatmap: RasterImage,
    pub report: LeakageReport,
    pub certificate: GuaranteeCertificate,
}

/// Runs leaking-patch identification followed by the Gaussian mechanism.
///
/// The model consumes pooled patch summaries (`pool` blocks per side);
/// noise lands on the raw patch pixels. Patches follow raster order, which
/// is both the conditioning order and the report order.
pub fn obfuscate_image(
    img: &RasterImage,
    model: &TideModel,
    config: &MechanismConfig,
    spec: &PatchSpec,
    pool: usize,
    s_alphabet: &[Vec<f64>],
    seed: u64,
) -> Result<ObfuscationOutput> {
    config.validate()?;
    spec.validate(img)?;
    let m = spec.num_patches(img);
    if model.feature_count() != m {
        return Err(PipelineError::PatchMismatch(format!(
            "model expects {} features, image decomposes into {m} patches",
            model.feature_count()
        )));
    }
    let expected_dim = channels_pool_dim(img.channels, pool);
    if model.layout().feature_dim != expected_dim {
        return Err(PipelineError::PatchMismatch(format!(
            "model feature dim {} vs pooled patch dim {expected_dim}",
            model.layout().feature_dim
        )));
    }

    let features = image_to_features(img, spec)?;
    let pooled = pool_patches(&features, spec, img.channels, pool)?;
    let ordering: Vec<usize> = (0..m).collect();
    let report = identify_leaking(model, &pooled, s_alphabet, config.eps, &ordering)?;

    let raw_features = obfuscate(
        &features,
        spec.feature_dim(img.channels),
        &report,
        config.lambda,
        seed,
        if config.clamp_output { Some((0.0, 1.0)) } else { None },
    )?;
    let clamped_features: Vec<f64> = raw_features
        .iter()
        .map(|&v| v.clamp(0.0, 1.0))
        .collect();
    let clamped = patches_to_image(&clamped_features, img.width, img.height, img.channels, spec)?;

    let heatmap = render_heatmap(img, spec, &report)?;
    let certificate = leakage_bound(config.eps, config.lambda, config.k_radius, m)?;
    Ok(ObfuscationOutput {
        clamped,
        raw_features,
        heatmap,
        report,
        certificate,
    })
}

fn channels_pool_dim(channels: usize, pool: usize) -> usize {
    channels * pool * pool
}

fn render_heatmap(img: &RasterImage, spec: &PatchSpec, report: &LeakageReport) -> Result<RasterImage> {
    let (grid_rows, grid_cols) = spec.grid(img);
    let peak = report
        .entries
        .iter()
        .map(|e| e.max_abs_cond_density)
        .fold(0.0f64, f64::max);
    let mut heat = RasterImage::zeros(img.width, img.height, 1);
    for entry in &report.entries {
        let value = if peak > 0.0 {
            entry.max_abs_cond_density / peak
        } else {
            0.0
        };
        let gr = entry.position / grid_cols;
        let gc = entry.position % grid_cols;
        debug_assert!(gr < grid_rows);
        for r in 0..spec.side {
            for c in 0..spec.side {
                heat.set(gr * spec.side + r, gc * spec.side + c, 0, value);
            }
        }
    }
    Ok(heat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;

    fn checker(width: usize, height: usize) -> RasterImage {
        let mut img = RasterImage::zeros(width, height, 1);
        for r in 0..height {
            for c in 0..width {
                img.set(r, c, 0, ((r + c) % 2) as f64);
            }
        }
        img
    }

    #[test]
    fn sixty_four_with_side_thirty_two_gives_four_patches() {
        let img = checker(64, 64);
        let spec = PatchSpec { side: 32 };
        assert_eq!(spec.num_patches(&img), 4);
        let feats = image_to_features(&img, &spec).unwrap();
        assert_eq!(feats.len(), 64 * 64);
    }

    #[test]
    fn whole_image_patch_is_the_flattened_image() {
        let img = checker(8, 8);
        let spec = PatchSpec { side: 8 };
        assert_eq!(spec.num_patches(&img), 1);
        let feats = image_to_features(&img, &spec).unwrap();
        assert_eq!(feats, img.pixels);
    }

    #[test]
    fn decomposition_reassembles_bit_exact() {
        let mut stream = SeedStream::new(3);
        let mut img = RasterImage::zeros(24, 16, 3);
        for v in &mut img.pixels {
            *v = stream.uniform();
        }
        for side in [2, 4, 8] {
            let spec = PatchSpec { side };
            let feats = image_to_features(&img, &spec).unwrap();
            let back = patches_to_image(&feats, 24, 16, 3, &spec).unwrap();
            assert_eq!(back, img, "side {side}");
        }
    }

    #[test]
    fn non_dividing_patch_rejected() {
        let img = checker(10, 10);
        assert!(image_to_features(&img, &PatchSpec { side: 3 }).is_err());
        assert!(image_to_features(&img, &PatchSpec { side: 20 }).is_err());
    }

    #[test]
    fn pooling_averages_blocks() {
        // one 4x4 patch, pool 2: four block means
        let img = RasterImage::new(
            4,
            4,
            1,
            vec![
                1.0, 1.0, 0.0, 0.0, //
                1.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, 1.0, //
                0.0, 0.0, 1.0, 1.0,
            ],
        )
        .unwrap();
        let spec = PatchSpec { side: 4 };
        let feats = image_to_features(&img, &spec).unwrap();
        let pooled = pool_patches(&feats, &spec, 1, 2).unwrap();
        assert_eq!(pooled, vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn invalid_pool_rejected() {
        let img = checker(8, 8);
        let spec = PatchSpec { side: 4 };
        let feats = image_to_features(&img, &spec).unwrap();
        assert!(pool_patches(&feats, &spec, 1, 3).is_err());
    }

    #[test]
    fn intensity_range_enforced() {
        assert!(RasterImage::new(1, 1, 1, vec![1.5]).is_err());
        assert!(RasterImage::new(1, 1, 1, vec![-0.1]).is_err());
        assert!(RasterImage::new(2, 1, 1, vec![0.5]).is_err());
        assert!(RasterImage::new(1, 1, 2, vec![0.5, 0.5]).is_err());
    }
}
