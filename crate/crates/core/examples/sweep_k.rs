//! Grid over cluster count and color space.
//!
//! ```text
//! cargo run --release --example sweep_k
//! ```

use floodlens::evaluation::{sweep_k, EvalSet};
use floodlens::segmentation::{build_reference_signature, Colorspace, SegmentConfig};
use floodlens::synthetic::{self, Family};

fn main() -> floodlens::Result<()> {
    let set = EvalSet::from_scenes("family-b", &synthetic::corpus(Family::B, 10, 8))?;
    let patches = synthetic::water_patches(3, 48, 7);
    let inputs: Vec<_> = patches.iter().map(|s| (s.image.clone(), s.interior_mask())).collect();
    let reference = build_reference_signature(&inputs)?;

    let rows = sweep_k(
        &set,
        &reference,
        &[2, 3, 4, 5],
        &[Colorspace::Lab, Colorspace::Rgb],
        &SegmentConfig::default(),
    )?;
    println!("colorspace  k  accuracy  precision  recall  f1");
    for (row, _) in rows {
        let m = row.metrics;
        println!(
            "{:<10} {:>2}  {:>8.3}  {:>9.3}  {:>6.3}  {:.3}",
            row.colorspace.to_string(),
            row.k,
            m.accuracy,
            m.precision,
            m.recall,
            m.f1
        );
    }
    Ok(())
}
