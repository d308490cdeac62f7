//! Reference water signatures and cluster-to-reference matching.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{rgb_to_gray, RgbImage};
use crate::texture::{histogram_distance, lbp_histogram, lbp_map, LbpHistogram, LbpMap, LBP_BINS};

/// Texture signature of known flooded regions, possibly from another geography.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSignature {
    histograms: Vec<LbpHistogram>,
    source_note: String,
}

const SIGNATURE_FORMAT: &str = "floodlens-reference";
const SIGNATURE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SignatureFile {
    format: String,
    version: u32,
    source_note: String,
    bins: usize,
    histograms: Vec<Vec<f64>>,
}

impl ReferenceSignature {
    pub fn new(histograms: Vec<LbpHistogram>, source_note: impl Into<String>) -> Result<Self> {
        if histograms.is_empty() {
            return Err(Error::EmptyReference);
        }
        if histograms.iter().any(|h| !h.is_normalized() || h.is_empty()) {
            return Err(Error::NotNormalized);
        }
        Ok(Self {
            histograms,
            source_note: source_note.into(),
        })
    }

    pub fn histograms(&self) -> &[LbpHistogram] {
        &self.histograms
    }

    pub fn source_note(&self) -> &str {
        &self.source_note
    }

    pub fn with_source_note(mut self, note: impl Into<String>) -> Self {
        self.source_note = note.into();
        self
    }

    /// Smallest chi-square distance from `hist` to any reference histogram.
    pub fn min_distance(&self, hist: &LbpHistogram) -> Result<f64> {
        let mut best = f64::INFINITY;
        for r in &self.histograms {
            best = best.min(histogram_distance(hist, r)?);
        }
        Ok(best)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = SignatureFile {
            format: SIGNATURE_FORMAT.to_string(),
            version: SIGNATURE_VERSION,
            source_note: self.source_note.clone(),
            bins: LBP_BINS,
            histograms: self.histograms.iter().map(|h| h.bins().to_vec()).collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SignatureFile = serde_json::from_str(text)?;
        if file.format != SIGNATURE_FORMAT || file.version != SIGNATURE_VERSION {
            return Err(Error::Format(format!(
                "expected {SIGNATURE_FORMAT} v{SIGNATURE_VERSION}, found {} v{}",
                file.format, file.version
            )));
        }
        if file.histograms.iter().any(|h| h.len() != file.bins) {
            return Err(Error::Format("histogram length disagrees with bin count".into()));
        }
        let hists = file.histograms.into_iter().map(LbpHistogram::from_bins).collect();
        Self::new(hists, file.source_note)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Builds one masked radius-1 LBP histogram per `(image, water mask)` pair.
///
/// Each mask covers the LBP interior of its image, i.e. `(w - 2) x (h - 2)`
/// pixels in row-major order.
pub fn build_reference_signature(inputs: &[(RgbImage, Vec<bool>)]) -> Result<ReferenceSignature> {
    if inputs.is_empty() {
        return Err(Error::EmptyReference);
    }
    let mut hists = Vec::with_capacity(inputs.len());
    for (i, (img, mask)) in inputs.iter().enumerate() {
        let map = lbp_map(&rgb_to_gray(img), 1)?;
        let hist = lbp_histogram(&map, Some(mask))?;
        if hist.is_empty() {
            return Err(Error::EmptyMask(i));
        }
        hists.push(hist);
    }
    ReferenceSignature::new(hists, "")
}

/// Outcome of comparing every cluster against the reference.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterMatch {
    pub water_segment: Option<usize>,
    /// Per-cluster minimum distance; empty clusters get `+inf`.
    pub distances: Vec<f64>,
}

/// Picks the cluster whose texture is closest to the reference.
///
/// Ties go to the lowest cluster index. No cluster is selected when the best
/// distance exceeds `reject_threshold`.
pub fn match_water_segment(
    labels: &[usize],
    k: usize,
    lbp: &LbpMap,
    reference: &ReferenceSignature,
    reject_threshold: f64,
) -> Result<WaterMatch> {
    if labels.len() != lbp.len() {
        return Err(Error::mismatch(
            format!("{} labels (LBP interior)", lbp.len()),
            labels.len(),
        ));
    }
    if reference.histograms.is_empty() {
        return Err(Error::EmptyReference);
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
        return Err(Error::InvalidParameter(format!("label {bad} >= k = {k}")));
    }

    let mut counts = vec![[0u64; LBP_BINS]; k];
    for (&l, &code) in labels.iter().zip(lbp.codes()) {
        counts[l][code as usize] += 1;
    }
    let mut distances = Vec::with_capacity(k);
    for c in counts {
        let total: u64 = c.iter().sum();
        if total == 0 {
            distances.push(f64::INFINITY);
            continue;
        }
        let hist = LbpHistogram::from_bins(c.iter().map(|&n| n as f64 / total as f64).collect());
        distances.push(reference.min_distance(&hist)?);
    }

    let mut best: Option<usize> = None;
    for (c, &d) in distances.iter().enumerate() {
        if best.is_none_or(|b| d < distances[b]) {
            best = Some(c);
        }
    }
    let water_segment = best.filter(|&b| distances[b] <= reject_threshold);
    Ok(WaterMatch {
        water_segment,
        distances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_hot(bin: usize) -> LbpHistogram {
        let mut b = vec![0.0; LBP_BINS];
        b[bin] = 1.0;
        LbpHistogram::from_bins(b)
    }

    #[test]
    fn exact_match_selected_at_zero() {
        let lbp = LbpMap::from_codes(4, 1, 1, vec![10, 10, 200, 200]).unwrap();
        let reference = ReferenceSignature::new(vec![one_hot(200)], "t").unwrap();
        let m = match_water_segment(&[0, 0, 1, 1], 2, &lbp, &reference, 0.9).unwrap();
        assert_eq!(m.water_segment, Some(1));
        assert_eq!(m.distances[1], 0.0);
    }

    #[test]
    fn ties_pick_lowest_index() {
        // both clusters are half on / half off the reference bin
        let lbp = LbpMap::from_codes(4, 1, 1, vec![7, 1, 7, 2]).unwrap();
        let reference = ReferenceSignature::new(vec![one_hot(7)], "t").unwrap();
        let m = match_water_segment(&[0, 0, 1, 1], 2, &lbp, &reference, 0.9).unwrap();
        assert_eq!(m.distances[0], m.distances[1]);
        assert_eq!(m.water_segment, Some(0));
    }

    #[test]
    fn far_clusters_rejected() {
        let lbp = LbpMap::from_codes(2, 1, 1, vec![1, 2]).unwrap();
        let reference = ReferenceSignature::new(vec![one_hot(9)], "t").unwrap();
        let m = match_water_segment(&[0, 1], 2, &lbp, &reference, 0.9).unwrap();
        assert_eq!(m.water_segment, None);
        assert!(m.distances.iter().all(|&d| (d - 1.0).abs() < 1e-9));
    }

    #[test]
    fn minimum_over_several_references() {
        let lbp = LbpMap::from_codes(2, 1, 1, vec![3, 3]).unwrap();
        let reference = ReferenceSignature::new(vec![one_hot(9), one_hot(3)], "t").unwrap();
        let m = match_water_segment(&[0, 0], 1, &lbp, &reference, 0.9).unwrap();
        assert_eq!(m.distances, vec![0.0]);
    }

    #[test]
    fn mismatched_labels() {
        let lbp = LbpMap::from_codes(2, 1, 1, vec![3, 3]).unwrap();
        let reference = ReferenceSignature::new(vec![one_hot(3)], "t").unwrap();
        assert!(matches!(
            match_water_segment(&[0], 1, &lbp, &reference, 0.9),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(ReferenceSignature::new(vec![], "t"), Err(Error::EmptyReference)));
    }

    #[test]
    fn constant_region_reference() {
        let img = RgbImage::from_fn(6, 6, |_, _| [90, 90, 90]);
        let mut mask = vec![false; 16];
        mask[5] = true;
        mask[6] = true;
        let sig = build_reference_signature(&[(img.clone(), mask.clone())]).unwrap();
        assert_eq!(sig.histograms().len(), 1);
        assert_eq!(sig.histograms()[0].bins()[255], 1.0);

        let twice = build_reference_signature(&[(img.clone(), mask.clone()), (img.clone(), mask)]).unwrap();
        assert_eq!(twice.histograms()[0], twice.histograms()[1]);

        assert!(matches!(
            build_reference_signature(&[(img.clone(), vec![false; 16])]),
            Err(Error::EmptyMask(0))
        ));
        assert!(matches!(
            build_reference_signature(&[(img, vec![true; 36])]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let bins: Vec<f64> = (0..LBP_BINS).map(|i| (i as f64 + 0.1) / 32793.6).collect();
        let total: f64 = bins.iter().sum();
        let h = LbpHistogram::from_bins(bins.iter().map(|b| b / total).collect());
        let sig = ReferenceSignature::new(vec![h], "origin A").unwrap();
        let back = ReferenceSignature::from_json(&sig.to_json().unwrap()).unwrap();
        assert_eq!(sig, back);
        assert!(ReferenceSignature::from_json(r#"{"format":"x","version":1,"source_note":"","bins":256,"histograms":[]}"#).is_err());
    }
}
