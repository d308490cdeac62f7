//! Batch runners over labelled image sets.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::manifest::DatasetManifest;
use super::metrics::Metrics;
use super::report::{EvalReport, ImageRecord};
use crate::classifier::{mlp_init, predict, train, MlpModel, TrainConfig};
use crate::error::{Error, Result};
use crate::imaging::{load_image, rgb_to_gray, RgbImage};
use crate::segmentation::{segment_and_classify, Colorspace, ReferenceSignature, SegmentConfig};
use crate::synthetic::Scene;
use crate::texture::{lbp_feature_512, LbpFeature512};
use crate::FloodLabel;

#[derive(Debug, Clone)]
pub enum ImageSource {
    Path(PathBuf),
    Memory(RgbImage),
}

impl ImageSource {
    pub fn load(&self) -> Result<RgbImage> {
        match self {
            ImageSource::Path(p) => load_image(p),
            ImageSource::Memory(img) => Ok(img.clone()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LabeledImage {
    pub id: String,
    pub source: ImageSource,
    pub truth: FloodLabel,
}

/// A named list of images with resolved ground-truth labels.
#[derive(Debug, Clone)]
pub struct EvalSet {
    pub name: String,
    pub items: Vec<LabeledImage>,
}

impl EvalSet {
    /// Resolves every entry's label; mask-based labels are read in parallel.
    pub fn from_manifest(manifest: &DatasetManifest) -> Result<Self> {
        let items = manifest
            .entries
            .par_iter()
            .map(|e| {
                Ok(LabeledImage {
                    id: e.image.display().to_string(),
                    source: ImageSource::Path(e.image.clone()),
                    truth: manifest.truth_of(e)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(manifest.name.clone(), items)
    }

    pub fn from_scenes(name: impl Into<String>, scenes: &[Scene]) -> Result<Self> {
        let name = name.into();
        let items = scenes
            .iter()
            .enumerate()
            .map(|(i, s)| LabeledImage {
                id: format!("{name}/{i:04}"),
                source: ImageSource::Memory(s.image.clone()),
                truth: s.label(),
            })
            .collect();
        Self::new(name, items)
    }

    pub fn new(name: impl Into<String>, items: Vec<LabeledImage>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(Self { name: name.into(), items })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

fn failed_record(item: &LabeledImage, e: Error) -> ImageRecord {
    log::warn!("{}: {e}", item.id);
    ImageRecord {
        path: item.id.clone(),
        truth: item.truth,
        predicted: FloodLabel::NonFlooded,
        value: 0.0,
        error: Some(e.to_string()),
    }
}

pub fn segmentation_model_id(config: &SegmentConfig) -> String {
    format!(
        "kmeans-k{}-{}-texture-{}",
        config.k,
        config.colorspace,
        if config.use_texture { "on" } else { "off" }
    )
}

/// Runs the segmentation detector on every image. Images are processed in
/// parallel; records keep the set's order. Per-image failures are recorded
/// and scored as non-flooded.
pub fn evaluate_segmentation(set: &EvalSet, reference: &ReferenceSignature, config: &SegmentConfig) -> Result<EvalReport> {
    if config.k < 2 {
        return Err(Error::InvalidK(config.k));
    }
    let records: Vec<ImageRecord> = set
        .items
        .par_iter()
        .map(|item| match item.source.load().and_then(|img| segment_and_classify(&img, reference, config)) {
            Ok(r) => ImageRecord {
                path: item.id.clone(),
                truth: item.truth,
                predicted: r.decision,
                value: r.water_fraction,
                error: None,
            },
            Err(e) => failed_record(item, e),
        })
        .collect();
    EvalReport::from_records(segmentation_model_id(config), set.name.clone(), None, records)
}

pub fn run_segmentation_eval(
    manifest: &DatasetManifest,
    reference: &ReferenceSignature,
    config: &SegmentConfig,
) -> Result<EvalReport> {
    evaluate_segmentation(&EvalSet::from_manifest(manifest)?, reference, config)
}

/// One cell of the k/colorspace grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub colorspace: Colorspace,
    pub k: usize,
    #[serde(flatten)]
    pub metrics: Metrics,
}

/// Evaluates every (k, colorspace) cell. Rows are ordered by k, then by the
/// order of `colorspaces`.
pub fn sweep_k(
    set: &EvalSet,
    reference: &ReferenceSignature,
    k_values: &[usize],
    colorspaces: &[Colorspace],
    base: &SegmentConfig,
) -> Result<Vec<(SweepRow, EvalReport)>> {
    if k_values.is_empty() {
        return Err(Error::InvalidParameter("k list is empty".into()));
    }
    if colorspaces.is_empty() {
        return Err(Error::InvalidParameter("colorspace list is empty".into()));
    }
    let mut out = Vec::with_capacity(k_values.len() * colorspaces.len());
    for &k in k_values {
        for &colorspace in colorspaces {
            let config = SegmentConfig { k, colorspace, ..*base };
            let report = evaluate_segmentation(set, reference, &config)?;
            out.push((
                SweepRow {
                    colorspace,
                    k,
                    metrics: report.metrics,
                },
                report,
            ));
        }
    }
    Ok(out)
}

/// Two-scale LBP feature of every image, in order. Each entry is either the
/// feature or the error that prevented computing it.
pub fn extract_features(set: &EvalSet) -> Vec<Result<LbpFeature512>> {
    set.items
        .par_iter()
        .map(|item| item.source.load().and_then(|img| lbp_feature_512(&rgb_to_gray(&img))))
        .collect()
}

/// Training pairs for `set`. Any unreadable image is fatal here.
pub fn training_data(set: &EvalSet) -> Result<Vec<(LbpFeature512, FloodLabel)>> {
    extract_features(set)
        .into_iter()
        .zip(&set.items)
        .map(|(f, item)| f.map(|f| (f, item.truth)))
        .collect()
}

/// Initialises a model from `cfg.seed` and trains it on `set`.
pub fn train_on_set(set: &EvalSet, cfg: &TrainConfig) -> Result<(MlpModel, Vec<f64>)> {
    let data = training_data(set)?;
    let model = mlp_init(cfg.seed, cfg.dropout_rate)?;
    train(&model, &data, cfg)
}

pub fn evaluate_model(
    model: &MlpModel,
    set: &EvalSet,
    model_id: impl Into<String>,
    train_dataset: Option<String>,
) -> Result<EvalReport> {
    let features = extract_features(set);
    let records: Vec<ImageRecord> = features
        .into_par_iter()
        .zip(set.items.par_iter())
        .map(|(f, item)| match f.and_then(|f| predict(model, &f)) {
            Ok(d) => ImageRecord {
                path: item.id.clone(),
                truth: item.truth,
                predicted: d.label,
                value: d.score,
                error: None,
            },
            Err(e) => failed_record(item, e),
        })
        .collect();
    EvalReport::from_records(model_id, set.name.clone(), train_dataset, records)
}

/// Trains on `train_set` and evaluates on `test_set`.
pub fn run_cross_eval(train_set: &EvalSet, test_set: &EvalSet, cfg: &TrainConfig) -> Result<EvalReport> {
    let (model, _) = train_on_set(train_set, cfg)?;
    evaluate_model(&model, test_set, "mlp", Some(train_set.name.clone()))
}

/// A dataset with its own train and test portions.
#[derive(Debug, Clone)]
pub struct SplitDataset {
    pub name: String,
    pub train: EvalSet,
    pub test: EvalSet,
}

/// The four train/test combinations of two datasets, in the order
/// (a, a), (a, b), (b, b), (b, a). Reports carry the dataset names.
pub fn run_cross_grid(a: &SplitDataset, b: &SplitDataset, cfg: &TrainConfig) -> Result<Vec<EvalReport>> {
    let (model_a, _) = train_on_set(&a.train, cfg)?;
    let (model_b, _) = train_on_set(&b.train, cfg)?;
    let cells = [(&model_a, a, a), (&model_a, a, b), (&model_b, b, b), (&model_b, b, a)];
    cells
        .iter()
        .map(|(model, tr, te)| {
            let mut r = evaluate_model(model, &te.test, "mlp", Some(tr.name.clone()))?;
            r.dataset = te.name.clone();
            Ok(r)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segmentation::build_reference_signature;
    use crate::synthetic::{self, Family};

    fn reference() -> ReferenceSignature {
        let patches = synthetic::water_patches(3, 48, 7);
        let inputs: Vec<_> = patches.iter().map(|s| (s.image.clone(), s.interior_mask())).collect();
        build_reference_signature(&inputs).unwrap()
    }

    #[test]
    fn segmentation_eval_is_ordered_and_deterministic() {
        let set = EvalSet::from_scenes("bench", &synthetic::corpus(Family::A, 4, 3)).unwrap();
        let sig = reference();
        let a = evaluate_segmentation(&set, &sig, &SegmentConfig::default()).unwrap();
        let b = evaluate_segmentation(&set, &sig, &SegmentConfig::default()).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let ids: Vec<_> = a.per_image.iter().map(|r| r.path.clone()).collect();
        let expected: Vec<_> = set.items.iter().map(|i| i.id.clone()).collect();
        assert_eq!(ids, expected);
        assert!(a.is_consistent());
        assert_eq!(a.confusion.total(), 8);
    }

    #[test]
    fn failures_are_flagged_not_fatal() {
        let mut set = EvalSet::from_scenes("s", &synthetic::corpus(Family::A, 1, 1)).unwrap();
        set.items.push(LabeledImage {
            id: "missing.png".into(),
            source: ImageSource::Path("/nonexistent/missing.png".into()),
            truth: FloodLabel::Flooded,
        });
        let r = evaluate_segmentation(&set, &reference(), &SegmentConfig::default()).unwrap();
        assert_eq!(r.failures, 1);
        let last = r.per_image.last().unwrap();
        assert_eq!(last.predicted, FloodLabel::NonFlooded);
        assert!(last.error.is_some());
    }

    #[test]
    fn sweep_shape_and_empty_list() {
        let set = EvalSet::from_scenes("s", &synthetic::corpus(Family::A, 2, 5)).unwrap();
        let sig = reference();
        let rows = sweep_k(&set, &sig, &[3, 4], &[Colorspace::Lab, Colorspace::Rgb], &SegmentConfig::default()).unwrap();
        let cells: Vec<_> = rows.iter().map(|(r, _)| (r.colorspace, r.k)).collect();
        assert_eq!(
            cells,
            [(Colorspace::Lab, 3), (Colorspace::Rgb, 3), (Colorspace::Lab, 4), (Colorspace::Rgb, 4)]
        );
        assert!(sweep_k(&set, &sig, &[], &[Colorspace::Lab], &SegmentConfig::default()).is_err());
    }

    #[test]
    fn empty_set_is_rejected() {
        assert!(matches!(EvalSet::new("x", vec![]), Err(Error::EmptyDataset)));
    }
}
