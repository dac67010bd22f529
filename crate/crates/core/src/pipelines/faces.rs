//! Procedural face-like images with a planted, exactly documented
//! attribute signal. Desk-scale stand-in for a real face corpus.

use serde::Serialize;

use super::image::RasterImage;
use super::{PipelineError, Result};
use crate::rng::SeedStream;

pub const FACE_SIZE: usize = 64;

/// Pixel rectangle (half-open) that carries the attribute signal, plus the
/// containing image quadrant for patch-level scoring.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SignalRegion {
    pub row_lo: usize,
    pub row_hi: usize,
    pub col_lo: usize,
    pub col_hi: usize,
    pub quadrant_row_lo: usize,
    pub quadrant_col_lo: usize,
}

impl SignalRegion {
    pub fn contains(&self, row: usize, col: usize) -> bool {
        (self.row_lo..self.row_hi).contains(&row) && (self.col_lo..self.col_hi).contains(&col)
    }

    /// Whether a patch (by raster position in a grid of `side`-sized
    /// patches) lies inside the signal quadrant (the lower-left 32x32).
    pub fn patch_in_quadrant(&self, position: usize, side: usize) -> bool {
        let cols = FACE_SIZE / side;
        let gr = position / cols;
        let gc = position % cols;
        let row = gr * side;
        let col = gc * side;
        row >= self.quadrant_row_lo
            && col >= self.quadrant_col_lo
            && col + side <= self.quadrant_col_lo + FACE_SIZE / 2
    }
}

#[derive(Debug, Clone)]
pub struct FaceCorpus {
    pub images: Vec<RasterImage>,
    pub labels: Vec<u8>,
    pub region: SignalRegion,
}

/// The arc that carries s = 1: circle center (row 44, col 16), radius 7,
/// band half-width 1.6, lower half only. All inside rows [35, 53) and
/// cols [7, 26), which sit inside the lower-left quadrant.
const ARC_CENTER: (f64, f64) = (44.0, 16.0);
const ARC_RADIUS: f64 = 7.0;
const ARC_BAND: f64 = 1.6;
const ARC_GAIN: f64 = 0.35;

fn signal_region() -> SignalRegion {
    SignalRegion {
        row_lo: 35,
        row_hi: 54,
        col_lo: 6,
        col_hi: 27,
        quadrant_row_lo: 32,
        quadrant_col_lo: 0,
    }
}

/// Generates n 64x64 grayscale images. A balanced binary attribute
/// deterministically modulates the documented arc region; everything else
/// (face oval, eyes, soft nuisance blobs, pixel noise) is independent of
/// the attribute.
pub fn synthetic_face_gen(n: usize, seed: u64) -> Result<FaceCorpus> {
    if n < 100 {
        return Err(PipelineError::InvalidSpec(format!(
            "need at least 100 faces, got {n}"
        )));
    }
    let mut stream = SeedStream::new(seed);
    let mut images = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let size = FACE_SIZE;
    for _ in 0..n {
        let label = u8::from(stream.uniform() < 0.5);
        let brightness = stream.uniform_in(-0.05, 0.05);
        // nuisance blobs: position, radius, amplitude all label-independent
        let blobs: Vec<(f64, f64, f64, f64)> = (0..3)
            .map(|_| {
                (
                    stream.uniform_in(0.0, size as f64),
                    stream.uniform_in(0.0, size as f64),
                    stream.uniform_in(5.0, 10.0),
                    stream.uniform_in(-0.12, 0.12),
                )
            })
            .collect();

        let mut pixels = Vec::with_capacity(size * size);
        for row in 0..size {
            for col in 0..size {
                let (rf, cf) = (row as f64, col as f64);
                let mut v = 0.35 + brightness;
                // face oval
                let oval = ((rf - 32.0) / 26.0).powi(2) + ((cf - 32.0) / 20.0).powi(2);
                if oval <= 1.0 {
                    v += 0.2;
                }
                // eyes
                for eye_col in [20.0, 44.0] {
                    let d2 = (rf - 22.0).powi(2) + (cf - eye_col).powi(2);
                    if d2 <= 9.0 {
                        v -= 0.25;
                    }
                }
                for &(br, bc, radius, amp) in &blobs {
                    let d2 = (rf - br).powi(2) + (cf - bc).powi(2);
                    v += amp * (-d2 / (2.0 * radius * radius)).exp();
                }
                if label == 1 {
                    let dist = ((rf - ARC_CENTER.0).powi(2) + (cf - ARC_CENTER.1).powi(2)).sqrt();
                    if (dist - ARC_RADIUS).abs() <= ARC_BAND && rf >= ARC_CENTER.0 {
                        v += ARC_GAIN;
                    }
                }
                v += stream.uniform_in(-0.04, 0.04);
                pixels.push(v.clamp(0.0, 1.0));
            }
        }
        images.push(RasterImage::new(size, size, 1, pixels)?);
        labels.push(label);
    }
    Ok(FaceCorpus {
        images,
        labels,
        region: signal_region(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::{info_density_discrete, DiscreteJoint};

    fn mean_image(corpus: &FaceCorpus, label: u8) -> Vec<f64> {
        let mut acc = vec![0.0; FACE_SIZE * FACE_SIZE];
        let mut count = 0;
        for (img, &l) in corpus.images.iter().zip(&corpus.labels) {
            if l == label {
                for (a, &p) in acc.iter_mut().zip(&img.pixels) {
                    *a += p;
                }
                count += 1;
            }
        }
        for a in &mut acc {
            *a /= count as f64;
        }
        acc
    }

    #[test]
    fn labels_are_balanced() {
        let corpus = synthetic_face_gen(1000, 7).unwrap();
        let ones = corpus.labels.iter().filter(|&&l| l == 1).count();
        // binomial(1000, 0.5): 5 sigma is about 79
        assert!((ones as i64 - 500).abs() < 80, "{ones} positives");
    }

    #[test]
    fn mean_images_differ_only_in_documented_region() {
        let corpus = synthetic_face_gen(600, 3).unwrap();
        let m0 = mean_image(&corpus, 0);
        let m1 = mean_image(&corpus, 1);
        let mut max_inside = 0.0f64;
        let mut max_outside = 0.0f64;
        for row in 0..FACE_SIZE {
            for col in 0..FACE_SIZE {
                let diff = (m1[row * FACE_SIZE + col] - m0[row * FACE_SIZE + col]).abs();
                if corpus.region.contains(row, col) {
                    max_inside = max_inside.max(diff);
                } else {
                    max_outside = max_outside.max(diff);
                }
            }
        }
        assert!(max_inside > 0.25, "signal too weak: {max_inside}");
        assert!(max_outside < 0.08, "leakage outside region: {max_outside}");
    }

    // An exhaustive binarized-patch empirical estimate on the signal patch
    // alone already shows nonzero information density.
    #[test]
    fn plugin_on_signal_patch_sees_density() {
        let corpus = synthetic_face_gen(400, 11).unwrap();
        // patch (row 2, col 1) of the 16-pixel grid covers rows 32..48,
        // cols 16..32, which intersects the arc
        let mut means: Vec<f64> = Vec::new();
        for img in &corpus.images {
            let mut acc = 0.0;
            for r in 40..48 {
                for c in 8..24 {
                    acc += img.get(r, c, 0);
                }
            }
            means.push(acc / 128.0);
        }
        let mut sorted = means.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = sorted[sorted.len() / 2];
        let mut counts = [[0.0f64; 2]; 2];
        for (m, &l) in means.iter().zip(&corpus.labels) {
            counts[l as usize][usize::from(*m > median)] += 1.0;
        }
        let total: f64 = counts.iter().flatten().sum();
        let joint = DiscreteJoint::new(vec![
            vec![counts[0][0] / total, counts[0][1] / total],
            vec![counts[1][0] / total, counts[1][1] / total],
        ])
        .unwrap();
        let mut max_abs = 0.0f64;
        for s in 0..2 {
            for x in 0..2 {
                let v = info_density_discrete(&joint, s, x).unwrap();
                if v.is_finite() {
                    max_abs = max_abs.max(v.abs());
                }
            }
        }
        assert!(max_abs > 0.2, "signal patch density {max_abs}");
    }

    #[test]
    fn patch_quadrant_classification() {
        let region = signal_region();
        // 16-pixel patches: positions 8, 9, 12, 13 are the lower-left quadrant
        let inside: Vec<usize> = (0..16)
            .filter(|&p| region.patch_in_quadrant(p, 16))
            .collect();
        assert_eq!(inside, vec![8, 9, 12, 13]);
    }

    #[test]
    fn too_few_faces_rejected() {
        assert!(synthetic_face_gen(50, 1).is_err());
    }
}
