use serde::{Deserialize, Serialize};

use super::features::{build_pixel_features, build_rgb_pixel_features, Colorspace};
use super::kmeans::{kmeans, KMeansParams};
use super::reference::{match_water_segment, ReferenceSignature};
use crate::error::{Error, Result};
use crate::imaging::{rgb_to_gray, rgb_to_lab, GrayImage, RgbImage};
use crate::texture::lbp_map;
use crate::FloodLabel;

/// Default share of water pixels above which an image counts as flooded.
pub const DEFAULT_DECISION_THRESHOLD: f64 = 0.25;
/// Default chi-square distance above which no cluster is accepted as water.
pub const DEFAULT_REJECT_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentConfig {
    pub k: usize,
    pub seed: u64,
    pub use_texture: bool,
    pub colorspace: Colorspace,
    pub decision_threshold: f64,
    pub reject_threshold: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub n_init: usize,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        let km = KMeansParams::default();
        Self {
            k: 3,
            seed: 0,
            use_texture: true,
            colorspace: Colorspace::Lab,
            decision_threshold: DEFAULT_DECISION_THRESHOLD,
            reject_threshold: DEFAULT_REJECT_THRESHOLD,
            max_iter: km.max_iter,
            tol: km.tol,
            n_init: km.n_init,
        }
    }
}

impl SegmentConfig {
    pub fn kmeans_params(&self) -> KMeansParams {
        KMeansParams {
            k: self.k,
            seed: self.seed,
            max_iter: self.max_iter,
            tol: self.tol,
            n_init: self.n_init,
        }
    }

    pub fn feature_dim(&self) -> usize {
        if self.use_texture {
            4
        } else {
            3
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationResult {
    /// Interior (LBP) window size; the source image is 2 pixels larger per axis.
    pub width: usize,
    pub height: usize,
    pub labels: Vec<usize>,
    pub water_segment: Option<usize>,
    pub segment_distances: Vec<f64>,
    pub water_fraction: f64,
    pub decision: FloodLabel,
    pub feature_dim: usize,
}

impl SegmentationResult {
    /// Full-size water mask: 255 on water pixels, 0 elsewhere (including the border).
    pub fn water_mask(&self) -> GrayImage {
        let (w, h) = (self.width + 2, self.height + 2);
        GrayImage::from_fn(w, h, |x, y| {
            if x == 0 || y == 0 || x > self.width || y > self.height {
                return 0;
            }
            let l = self.labels[(y - 1) * self.width + (x - 1)];
            if Some(l) == self.water_segment {
                255
            } else {
                0
            }
        })
    }
}

/// Strict `fraction > threshold` rule shared by predictions and ground truth.
pub fn decide(fraction: f64, threshold: f64) -> FloodLabel {
    if fraction > threshold {
        FloodLabel::Flooded
    } else {
        FloodLabel::NonFlooded
    }
}

/// Segments `img` with k-means over color (+ texture) features and decides
/// whether the reference-matched water cluster covers enough of it.
pub fn segment_and_classify(
    img: &RgbImage,
    reference: &ReferenceSignature,
    config: &SegmentConfig,
) -> Result<SegmentationResult> {
    if config.k < 2 {
        return Err(Error::InvalidK(config.k));
    }
    img.ensure_min_size(crate::imaging::MIN_DIMENSION)?;
    let lbp = lbp_map(&rgb_to_gray(img), 1)?;
    let inner = img.interior(1);
    let features = match config.colorspace {
        Colorspace::Lab => build_pixel_features(&rgb_to_lab(&inner), &lbp, config.use_texture)?,
        Colorspace::Rgb => build_rgb_pixel_features(&inner, &lbp, config.use_texture)?,
    };
    let clusters = kmeans(&features, &config.kmeans_params())?;
    let matched = match_water_segment(&clusters.labels, config.k, &lbp, reference, config.reject_threshold)?;

    let water_fraction = match matched.water_segment {
        Some(w) => clusters.labels.iter().filter(|&&l| l == w).count() as f64 / clusters.labels.len() as f64,
        None => 0.0,
    };
    Ok(SegmentationResult {
        width: lbp.width(),
        height: lbp.height(),
        labels: clusters.labels,
        water_segment: matched.water_segment,
        segment_distances: matched.distances,
        water_fraction,
        decision: decide(water_fraction, config.decision_threshold),
        feature_dim: features.dim(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::texture::{LbpHistogram, LBP_BINS};

    #[test]
    fn decision_rule_is_strict() {
        assert_eq!(decide(0.40, 0.25), FloodLabel::Flooded);
        assert_eq!(decide(0.25, 0.25), FloodLabel::NonFlooded);
        assert_eq!(decide(0.0, 0.25), FloodLabel::NonFlooded);
    }

    #[test]
    fn rejects_k_below_two() {
        let img = RgbImage::from_fn(8, 8, |_, _| [0, 0, 0]);
        let mut b = vec![0.0; LBP_BINS];
        b[255] = 1.0;
        let sig = ReferenceSignature::new(vec![LbpHistogram::from_bins(b)], "").unwrap();
        let cfg = SegmentConfig { k: 1, ..Default::default() };
        assert!(matches!(segment_and_classify(&img, &sig, &cfg), Err(Error::InvalidK(1))));
    }

    #[test]
    fn mask_has_image_size_and_zero_border() {
        let r = SegmentationResult {
            width: 2,
            height: 1,
            labels: vec![1, 0],
            water_segment: Some(1),
            segment_distances: vec![0.5, 0.1],
            water_fraction: 0.5,
            decision: FloodLabel::Flooded,
            feature_dim: 4,
        };
        let m = r.water_mask();
        assert_eq!((m.width(), m.height()), (4, 3));
        assert_eq!(m.data(), &[0, 0, 0, 0, 0, 255, 0, 0, 0, 0, 0, 0]);
    }
}
