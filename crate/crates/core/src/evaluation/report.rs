use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::{compute_metrics, ConfusionMatrix, Metrics};
use crate::error::{Error, Result};
use crate::FloodLabel;

/// Outcome for one evaluated image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub path: String,
    pub truth: FloodLabel,
    pub predicted: FloodLabel,
    /// Water fraction for segmentation runs, classifier score for MLP runs.
    pub value: f64,
    /// Set when the pipeline failed on this image; it then counts as a
    /// non-flooded prediction.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model_id: String,
    pub dataset: String,
    pub train_dataset: Option<String>,
    #[serde(flatten)]
    pub metrics: Metrics,
    pub confusion: ConfusionMatrix,
    pub failures: usize,
    pub per_image: Vec<ImageRecord>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    path: &'a str,
    truth: &'a str,
    predicted: &'a str,
    score_or_fraction: f64,
}

impl EvalReport {
    pub fn from_records(
        model_id: impl Into<String>,
        dataset: impl Into<String>,
        train_dataset: Option<String>,
        per_image: Vec<ImageRecord>,
    ) -> Result<Self> {
        let confusion = ConfusionMatrix::from_pairs(per_image.iter().map(|r| (r.truth, r.predicted)));
        let metrics = compute_metrics(&confusion)?;
        Ok(Self {
            model_id: model_id.into(),
            dataset: dataset.into(),
            train_dataset,
            metrics,
            confusion,
            failures: per_image.iter().filter(|r| r.error.is_some()).count(),
            per_image,
        })
    }

    /// Recounts the confusion matrix from `per_image` and checks it against
    /// the stored aggregate.
    pub fn is_consistent(&self) -> bool {
        let cm = ConfusionMatrix::from_pairs(self.per_image.iter().map(|r| (r.truth, r.predicted)));
        cm == self.confusion && compute_metrics(&cm).is_ok_and(|m| m == self.metrics)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.per_image {
            w.serialize(CsvRow {
                path: &r.path,
                truth: r.truth.as_str(),
                predicted: r.predicted.as_str(),
                score_or_fraction: r.value,
            })?;
        }
        w.into_inner().map_err(|e| Error::Encode(e.to_string()))
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use FloodLabel::*;

    fn rec(path: &str, truth: FloodLabel, predicted: FloodLabel, value: f64) -> ImageRecord {
        ImageRecord {
            path: path.into(),
            truth,
            predicted,
            value,
            error: None,
        }
    }

    #[test]
    fn aggregates_and_round_trips() {
        let mut records = vec![
            rec("a.png", Flooded, Flooded, 0.6),
            rec("b.png", Flooded, NonFlooded, 0.1),
            rec("c.png", NonFlooded, NonFlooded, 0.0),
        ];
        records[1].error = Some("decode failed".into());
        let r = EvalReport::from_records("m", "d", None, records).unwrap();
        assert_eq!(r.confusion, ConfusionMatrix::new(1, 0, 1, 1));
        assert_eq!(r.failures, 1);
        assert!(r.is_consistent());

        let json = r.to_json().unwrap();
        assert!(json.contains("\"accuracy\""));
        assert!(json.contains("\"fn\": 1"));
        assert_eq!(EvalReport::from_json(&json).unwrap(), r);

        let csv = String::from_utf8(r.to_csv().unwrap()).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "path,truth,predicted,score_or_fraction");
        assert_eq!(lines[1], "a.png,flooded,flooded,0.6");
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn single_dry_image() {
        let r = EvalReport::from_records("m", "d", None, vec![rec("x", NonFlooded, NonFlooded, 0.0)]).unwrap();
        assert_eq!(r.confusion.tn, 1);
        let r = EvalReport::from_records("m", "d", None, vec![rec("x", Flooded, NonFlooded, 0.0)]).unwrap();
        assert_eq!(r.confusion.fn_, 1);
        assert!(matches!(EvalReport::from_records("m", "d", None, vec![]), Err(Error::EmptyEvaluation)));
    }

    #[test]
    fn tampered_report_is_inconsistent() {
        let mut r = EvalReport::from_records("m", "d", None, vec![rec("x", Flooded, Flooded, 0.9)]).unwrap();
        r.per_image[0].predicted = NonFlooded;
        assert!(!r.is_consistent());
    }
}
