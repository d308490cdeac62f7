//! Compares backpropagated gradients with central finite differences.
//!
//! ```text
//! cargo run --release --example gradient_check
//! ```

use floodlens::classifier::{gradient_check, mlp_init};
use floodlens::imaging::rgb_to_gray;
use floodlens::synthetic::{self, Family};
use floodlens::texture::lbp_feature_512;

fn main() -> floodlens::Result<()> {
    let scenes = synthetic::corpus(Family::B, 3, 5);
    for (i, scene) in scenes.iter().enumerate() {
        let model = mlp_init(i as u64, 0.2)?;
        let x = lbp_feature_512(&rgb_to_gray(&scene.image))?;
        let err = gradient_check(&model, &x, scene.label(), i as u64)?;
        println!("scene {i} ({}): max relative error {err:.2e}", scene.label());
    }
    Ok(())
}
