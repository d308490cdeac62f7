use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::segmentation::decide;
use crate::FloodLabel;

/// Share of water pixels above which a ground-truth mask is flooded.
pub const GROUND_TRUTH_THRESHOLD: f64 = 0.25;

/// Binary confusion counts with flooded as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        Self { tp, fp, fn_, tn }
    }

    pub fn record(&mut self, truth: FloodLabel, predicted: FloodLabel) {
        match (truth.is_flooded(), predicted.is_flooded()) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (FloodLabel, FloodLabel)>) -> Self {
        let mut cm = Self::default();
        for (t, p) in pairs {
            cm.record(t, p);
        }
        cm
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when any ratio was 0/0 and therefore reported as 0.
    pub degenerate: bool,
}

fn ratio(num: f64, den: f64, degenerate: &mut bool) -> f64 {
    if den == 0.0 {
        *degenerate = true;
        0.0
    } else {
        num / den
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

pub fn compute_metrics(cm: &ConfusionMatrix) -> Result<Metrics> {
    if cm.total() == 0 {
        return Err(Error::EmptyEvaluation);
    }
    let mut degenerate = false;
    let (tp, fp, fn_, tn) = (cm.tp as f64, cm.fp as f64, cm.fn_ as f64, cm.tn as f64);
    let precision = ratio(tp, tp + fp, &mut degenerate);
    let recall = ratio(tp, tp + fn_, &mut degenerate);
    if precision + recall == 0.0 {
        degenerate = true;
    }
    Ok(Metrics {
        accuracy: (tp + tn) / cm.total() as f64,
        precision,
        recall,
        f1: f1_score(precision, recall),
        degenerate,
    })
}

/// Fraction of mask pixels whose class value is in `water_values`.
pub fn water_fraction(mask: &[u8], water_values: &[u8]) -> f64 {
    if mask.is_empty() {
        return 0.0;
    }
    let mut is_water = [false; 256];
    for &v in water_values {
        is_water[v as usize] = true;
    }
    mask.iter().filter(|&&v| is_water[v as usize]).count() as f64 / mask.len() as f64
}

/// Flooded iff the water share of `mask` is strictly above `threshold`.
pub fn derive_label(mask: &[u8], water_values: &[u8], threshold: f64) -> FloodLabel {
    decide(water_fraction(mask, water_values), threshold)
}
