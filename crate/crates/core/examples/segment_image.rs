//! Segments one image and decides whether it shows flooding.
//!
//! ```text
//! cargo run --example segment_image [-- IMAGE.png]
//! ```
//! Without an argument a generated flooded scene is used.

use floodlens::imaging::load_image;
use floodlens::segmentation::{build_reference_signature, segment_and_classify, SegmentConfig};
use floodlens::synthetic::{self, Family};

fn main() -> floodlens::Result<()> {
    let image = match std::env::args().nth(1) {
        Some(path) => load_image(path)?,
        None => synthetic::corpus(Family::A, 1, 3)[0].image.clone(),
    };
    let patches = synthetic::water_patches(3, 48, 7);
    let inputs: Vec<_> = patches.iter().map(|s| (s.image.clone(), s.interior_mask())).collect();
    let reference = build_reference_signature(&inputs)?;

    for use_texture in [true, false] {
        let cfg = SegmentConfig { use_texture, ..SegmentConfig::default() };
        let r = segment_and_classify(&image, &reference, &cfg)?;
        let dist: Vec<String> = r.segment_distances.iter().map(|d| format!("{d:.3}")).collect();
        println!(
            "texture {:<5} dim {} distances [{}] water segment {:?} fraction {:.3} -> {}",
            use_texture,
            r.feature_dim,
            dist.join(", "),
            r.water_segment,
            r.water_fraction,
            r.decision
        );
        if use_texture {
            let out = std::env::temp_dir().join("floodlens-mask.png");
            r.water_mask().save_png(&out)?;
            println!("mask written to {}", out.display());
        }
    }
    Ok(())
}
