//! WebAssembly bindings for the interactive demo page.
//!
//! Three operations are exposed: the closed-form Gaussian information
//! density field, the E-gamma noise-calibration curve with its solver, and
//! an end-to-end face-patch pipeline (generate a corpus, train the
//! estimator, then flag and obfuscate patches interactively).

#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN-rejecting range guards

use wasm_bindgen::prelude::*;

use tide_core::divergence::{egamma_gaussian, GaussianFeatureModel};
use tide_core::estimators::cond_density_estimate;
use tide_core::mechanism::{calibrate_lambda, identify_leaking, leakage_bound, obfuscate};
use tide_core::num::percentile;
use tide_core::pipelines::{
    image_to_features, patch_train_config, pool_patches, synthetic_face_gen, train_patch_model,
    PatchModel, PatchSpec, SignalRegion, FACE_SIZE,
};

fn err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Closed-form information density i(s; x) for the 1-d correlated pair,
/// sampled on a `resolution` x `resolution` grid over
/// [-half_range, half_range]^2 (s down rows, x across columns, row major).
#[wasm_bindgen]
pub fn info_density_field(
    rho: f64,
    half_range: f64,
    resolution: usize,
) -> Result<Vec<f64>, JsValue> {
    if !(2..=1024).contains(&resolution) {
        return Err(err("resolution must lie in [2, 1024]"));
    }
    let model = GaussianFeatureModel::new(1, rho).map_err(err)?;
    let mut out = Vec::with_capacity(resolution * resolution);
    for i in 0..resolution {
        let s = -half_range + 2.0 * half_range * i as f64 / (resolution - 1) as f64;
        for j in 0..resolution {
            let x = -half_range + 2.0 * half_range * j as f64 / (resolution - 1) as f64;
            out.push(model.info_density(&[s], &[x]).map_err(err)?);
        }
    }
    Ok(out)
}

/// Mutual information of the 1-d pair in nats.
#[wasm_bindgen]
pub fn gaussian_mi(rho: f64) -> Result<f64, JsValue> {
    Ok(GaussianFeatureModel::new(1, rho).map_err(err)?.mutual_information())
}

/// Per-feature divergence level theta_{e^eps}(K, lambda) sampled at
/// `points` log-spaced noise scales in [lambda_min, lambda_max];
/// returns interleaved (lambda, theta) pairs.
#[wasm_bindgen]
pub fn calibration_curve(
    eps: f64,
    k_radius: f64,
    lambda_min: f64,
    lambda_max: f64,
    points: usize,
) -> Result<Vec<f64>, JsValue> {
    if !(lambda_min > 0.0) || !(lambda_max > lambda_min) || !(2..=4096).contains(&points) {
        return Err(err("need 0 < lambda_min < lambda_max and 2 <= points <= 4096"));
    }
    let gamma = eps.exp();
    let log_lo = lambda_min.ln();
    let log_hi = lambda_max.ln();
    let mut out = Vec::with_capacity(2 * points);
    for i in 0..points {
        let lambda = (log_lo + (log_hi - log_lo) * i as f64 / (points - 1) as f64).exp();
        out.push(lambda);
        out.push(egamma_gaussian(k_radius, lambda, gamma).map_err(err)?);
    }
    Ok(out)
}

/// Smallest noise scale meeting the per-feature budget delta/m.
#[wasm_bindgen]
pub fn calibrate(eps: f64, delta: f64, m: usize, k_radius: f64) -> Result<f64, JsValue> {
    Ok(calibrate_lambda(eps, delta, m, k_radius).map_err(err)?.lambda)
}

const PATCH_SIDE: usize = 16;
const POOL: usize = 2;
const TRIM_BOUND: f64 = 3.0;
const PATCH_COUNT: usize = (FACE_SIZE / PATCH_SIDE) * (FACE_SIZE / PATCH_SIDE);

/// The face pipeline held in memory: corpus, trained model, and cached
/// conditional-density magnitudes for quantile thresholds.
#[wasm_bindgen]
pub struct FaceDemo {
    images: Vec<tide_core::pipelines::RasterImage>,
    region: SignalRegion,
    patch_model: PatchModel,
    magnitudes: Vec<f64>,
}

#[wasm_bindgen]
impl FaceDemo {
    /// Generates `n` faces and trains the patch estimator. Blocks for a
    /// few seconds; call it once and keep the handle.
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, seed: u32, epochs: usize) -> Result<FaceDemo, JsValue> {
        let corpus = synthetic_face_gen(n, seed as u64).map_err(err)?;
        let mut config = patch_train_config(seed as u64 ^ 0x7ea1);
        config.epochs = epochs.clamp(20, 2000);
        let spec = PatchSpec { side: PATCH_SIDE };
        let patch_model = train_patch_model(
            &corpus.images,
            &corpus.labels,
            &spec,
            POOL,
            TRIM_BOUND,
            &config,
        )
        .map_err(err)?;
        let mut magnitudes = Vec::new();
        for &row in patch_model.data.test_indices() {
            let x = patch_model.data.x.row(row);
            for j in 1..=PATCH_COUNT {
                let mut best = 0.0f64;
                for s in 0..2 {
                    let v = cond_density_estimate(&patch_model.model, &[s as f64], x, j)
                        .map_err(err)?
                        .abs();
                    best = best.max(v);
                }
                magnitudes.push(best);
            }
        }
        Ok(FaceDemo {
            images: corpus.images,
            region: corpus.region,
            patch_model,
            magnitudes,
        })
    }

    pub fn face_count(&self) -> usize {
        self.images.len()
    }

    pub fn final_objective(&self) -> f64 {
        self.patch_model.report.final_objective
    }

    pub fn empirical_k(&self) -> f64 {
        self.patch_model.empirical_k
    }

    /// Threshold corresponding to a quantile of the cached magnitudes.
    pub fn eps_at_quantile(&self, q: f64) -> f64 {
        percentile(&self.magnitudes, q.clamp(0.0, 1.0))
    }

    /// Runs identification + obfuscation for one face and returns three
    /// concatenated 64x64 grayscale byte planes: original, leakage
    /// heatmap, obfuscated.
    pub fn render(
        &self,
        face: usize,
        eps: f64,
        lambda: f64,
        noise_seed: u32,
    ) -> Result<Vec<u8>, JsValue> {
        let img = self.images.get(face).ok_or_else(|| err("face index out of range"))?;
        let spec = PatchSpec { side: PATCH_SIDE };
        let features = image_to_features(img, &spec).map_err(err)?;
        let pooled = pool_patches(&features, &spec, 1, POOL).map_err(err)?;
        let ordering: Vec<usize> = (0..PATCH_COUNT).collect();
        let alphabet = vec![vec![0.0], vec![1.0]];
        let report =
            identify_leaking(&self.patch_model.model, &pooled, &alphabet, eps, &ordering)
                .map_err(err)?;
        let noised = obfuscate(
            &features,
            spec.feature_dim(1),
            &report,
            lambda,
            noise_seed as u64,
            None,
        )
        .map_err(err)?;

        let mut out = Vec::with_capacity(3 * FACE_SIZE * FACE_SIZE);
        out.extend(img.pixels.iter().map(|&v| (v * 255.0).round() as u8));
        let peak = report
            .entries
            .iter()
            .map(|e| e.max_abs_cond_density)
            .fold(0.0f64, f64::max);
        let cols = FACE_SIZE / PATCH_SIDE;
        for row in 0..FACE_SIZE {
            for col in 0..FACE_SIZE {
                let position = (row / PATCH_SIDE) * cols + col / PATCH_SIDE;
                let entry = &report.entries[position];
                let value = if peak > 0.0 {
                    entry.max_abs_cond_density / peak
                } else {
                    0.0
                };
                out.push((value * 255.0).round() as u8);
            }
        }
        // reassemble the noised features into raster order, clamped for display
        let obf =
            tide_core::pipelines::patches_to_image(&noised.iter().map(|&v| v.clamp(0.0, 1.0)).collect::<Vec<_>>(), FACE_SIZE, FACE_SIZE, 1, &spec)
                .map_err(err)?;
        out.extend(obf.pixels.iter().map(|&v| (v * 255.0).round() as u8));
        Ok(out)
    }

    /// Leakage report and certificate for one face at (eps, lambda), as JSON.
    pub fn report_json(&self, face: usize, eps: f64, lambda: f64) -> Result<String, JsValue> {
        let img = self.images.get(face).ok_or_else(|| err("face index out of range"))?;
        let spec = PatchSpec { side: PATCH_SIDE };
        let features = image_to_features(img, &spec).map_err(err)?;
        let pooled = pool_patches(&features, &spec, 1, POOL).map_err(err)?;
        let ordering: Vec<usize> = (0..PATCH_COUNT).collect();
        let alphabet = vec![vec![0.0], vec![1.0]];
        let report =
            identify_leaking(&self.patch_model.model, &pooled, &alphabet, eps, &ordering)
                .map_err(err)?;
        let certificate = leakage_bound(eps, lambda, self.patch_model.empirical_k, PATCH_COUNT)
            .map_err(err)?;
        let flagged: Vec<usize> = report.leaking_positions();
        let in_region = flagged
            .iter()
            .filter(|&&p| self.region.patch_in_quadrant(p, PATCH_SIDE))
            .count();
        let value = serde_json::json!({
            "flagged_patches": flagged,
            "flagged_in_signal_quadrant": in_region,
            "report": report,
            "certificate": certificate,
        });
        serde_json::to_string_pretty(&value).map_err(err)
    }
}
