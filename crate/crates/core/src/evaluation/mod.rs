//! Dataset ingestion, metrics, reports and experiment runners.

mod manifest;
mod metrics;
mod report;
mod runner;

pub use manifest::{load_manifest, ClassFolders, DatasetLayout, DatasetManifest, GroundTruth, ManifestEntry};
pub use metrics::{
    compute_metrics, derive_label, f1_score, water_fraction, ConfusionMatrix, Metrics, GROUND_TRUTH_THRESHOLD,
};
pub use report::{EvalReport, ImageRecord};
pub use runner::{
    evaluate_model, evaluate_segmentation, extract_features, run_cross_eval, run_cross_grid, run_segmentation_eval,
    segmentation_model_id, sweep_k, train_on_set, training_data, EvalSet, ImageSource, LabeledImage, SplitDataset,
    SweepRow,
};
