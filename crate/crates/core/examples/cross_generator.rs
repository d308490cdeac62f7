//! Trains on one scene generator and tests on both, in the order
//! A/A, A/B, B/B, B/A.
//!
//! ```text
//! cargo run --release --example cross_generator
//! ```

use floodlens::classifier::TrainConfig;
use floodlens::evaluation::{run_cross_grid, EvalSet, SplitDataset};
use floodlens::synthetic::{self, Family};

fn split(family: Family, seed: u64) -> floodlens::Result<SplitDataset> {
    Ok(SplitDataset {
        name: family.name().to_string(),
        train: EvalSet::from_scenes("train", &synthetic::corpus(family, 30, seed))?,
        test: EvalSet::from_scenes("test", &synthetic::corpus(family, 20, seed + 1))?,
    })
}

fn main() -> floodlens::Result<()> {
    let a = split(Family::A, 11)?;
    let b = split(Family::B, 21)?;
    for r in run_cross_grid(&a, &b, &TrainConfig::default())? {
        println!(
            "train {:<10} test {:<10} accuracy {:.3}  F1 {:.3}",
            r.train_dataset.as_deref().unwrap_or("-"),
            r.dataset,
            r.metrics.accuracy,
            r.metrics.f1
        );
    }
    Ok(())
}
