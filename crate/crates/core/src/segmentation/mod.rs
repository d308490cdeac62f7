//! Unsupervised water segmentation: color + LBP features, k-means, and
//! reference-histogram matching of the resulting clusters.

mod features;
mod kmeans;
mod pipeline;
mod reference;

pub use features::{build_pixel_features, build_rgb_pixel_features, Colorspace, PixelFeatureMatrix};
pub use kmeans::{kmeans, KMeansParams, KMeansResult};
pub use pipeline::{
    decide, segment_and_classify, SegmentConfig, SegmentationResult, DEFAULT_DECISION_THRESHOLD,
    DEFAULT_REJECT_THRESHOLD,
};
pub use reference::{build_reference_signature, match_water_segment, ReferenceSignature, WaterMatch};
