//! Builds a water texture signature from image/mask pairs on disk.
//!
//! ```text
//! cargo run --example build_reference [-- OUT_DIR]
//! ```

use std::path::PathBuf;

use floodlens::imaging::{load_image, load_mask};
use floodlens::segmentation::{build_reference_signature, ReferenceSignature};
use floodlens::synthetic;
use floodlens::texture::{histogram_distance, lbp_histogram, lbp_map};

fn main() -> floodlens::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("floodlens-reference"));

    // Stand-in for annotated water crops from another region.
    synthetic::write_image_plus_mask(&synthetic::water_patches(4, 48, 1), &out)?;

    let mut paths: Vec<PathBuf> = std::fs::read_dir(out.join("images"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    let mut inputs = Vec::new();
    for path in paths {
        let mask = load_mask(out.join("masks").join(path.file_name().unwrap()))?;
        let water: Vec<bool> = mask.interior(1).data().iter().map(|&v| v == 255).collect();
        inputs.push((load_image(&path)?, water));
    }
    let sig = build_reference_signature(&inputs)?.with_source_note("synthetic water patches");
    sig.save(out.join("reference.json"))?;

    let reloaded = ReferenceSignature::load(out.join("reference.json"))?;
    println!("{} histograms, note: {:?}", reloaded.histograms().len(), reloaded.source_note());
    for (i, a) in reloaded.histograms().iter().enumerate() {
        let row: Vec<String> = reloaded
            .histograms()
            .iter()
            .map(|b| format!("{:.3}", histogram_distance(a, b).unwrap()))
            .collect();
        println!("  patch {i}: {}", row.join(" "));
    }

    // a dry texture is far from every patch
    let dry = &synthetic::corpus(synthetic::Family::A, 1, 5)[1];
    let gray = floodlens::imaging::rgb_to_gray(&dry.image);
    let h = lbp_histogram(&lbp_map(&gray, 1)?, None)?;
    println!("dry scene distance: {:.3}", reloaded.min_distance(&h)?);
    println!("written to {}", out.display());
    Ok(())
}
