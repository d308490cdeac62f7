//! Evaluates the segmentation detector over a dataset directory.
//!
//! ```text
//! cargo run --release --example evaluate_dataset [-- DATASET_DIR]
//! ```
//! DATASET_DIR holds `flooded/` and `normal/` folders. Without an argument a
//! generated dataset is written to a temporary directory first.

use std::path::PathBuf;

use floodlens::evaluation::{load_manifest, run_segmentation_eval, ClassFolders, DatasetLayout};
use floodlens::segmentation::{build_reference_signature, SegmentConfig};
use floodlens::synthetic::{self, Family};

fn main() -> floodlens::Result<()> {
    let root = match std::env::args().nth(1) {
        Some(dir) => PathBuf::from(dir),
        None => {
            let dir = std::env::temp_dir().join("floodlens-dataset");
            synthetic::write_folder_per_class(&synthetic::corpus(Family::B, 10, 42), &dir)?;
            dir
        }
    };
    let manifest = load_manifest(&root, DatasetLayout::FolderPerClass, &[255], &ClassFolders::default())?;
    println!("{} images, {} flooded", manifest.len(), manifest.positives()?);

    let patches = synthetic::water_patches(3, 48, 7);
    let inputs: Vec<_> = patches.iter().map(|s| (s.image.clone(), s.interior_mask())).collect();
    let reference = build_reference_signature(&inputs)?;

    let report = run_segmentation_eval(&manifest, &reference, &SegmentConfig::default())?;
    let m = &report.metrics;
    println!(
        "{}: accuracy {:.3} precision {:.3} recall {:.3} F1 {:.3} ({} failures)",
        report.model_id, m.accuracy, m.precision, m.recall, m.f1, report.failures
    );
    let csv = root.join("report.csv");
    report.write_csv(&csv)?;
    println!("per-image rows in {}", csv.display());
    Ok(())
}
