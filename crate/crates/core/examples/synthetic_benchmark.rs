//! Texture ablation on the synthetic benchmark: blue roofs and blue water
//! only separate once LBP codes are part of the pixel features.
//!
//! ```text
//! cargo run --release --example synthetic_benchmark [-- SEED]
//! ```

use floodlens::evaluation::{evaluate_segmentation, EvalSet};
use floodlens::segmentation::{build_reference_signature, SegmentConfig};
use floodlens::synthetic;

fn main() -> floodlens::Result<()> {
    let seed = std::env::args().nth(1).map_or(1, |s| s.parse().expect("seed"));
    let set = EvalSet::from_scenes("benchmark", &synthetic::benchmark(seed))?;
    let patches = synthetic::water_patches(3, 48, 99);
    let inputs: Vec<_> = patches.iter().map(|s| (s.image.clone(), s.interior_mask())).collect();
    let reference = build_reference_signature(&inputs)?;

    for use_texture in [true, false] {
        let cfg = SegmentConfig { use_texture, ..SegmentConfig::default() };
        let r = evaluate_segmentation(&set, &reference, &cfg)?;
        let c = r.confusion;
        println!(
            "{:<28} F1 {:.3}  accuracy {:.3}  tp {} fp {} fn {} tn {}",
            r.model_id, r.metrics.f1, r.metrics.accuracy, c.tp, c.fp, c.fn_, c.tn
        );
    }
    Ok(())
}
