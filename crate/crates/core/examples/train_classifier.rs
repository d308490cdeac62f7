//! Trains the LBP classifier on generated scenes, saves it and reloads it.
//!
//! ```text
//! cargo run --release --example train_classifier
//! ```

use floodlens::classifier::{load_model, mlp_init, predict, save_model, train, TrainConfig};
use floodlens::evaluation::{training_data, EvalSet};
use floodlens::synthetic::{self, Family};

fn main() -> floodlens::Result<()> {
    let set = EvalSet::from_scenes("train", &synthetic::corpus(Family::A, 30, 11))?;
    let data = training_data(&set)?;
    let cfg = TrainConfig::default();
    let (model, history) = train(&mlp_init(cfg.seed, cfg.dropout_rate)?, &data, &cfg)?;
    for (epoch, loss) in history.iter().enumerate().step_by(20) {
        println!("epoch {epoch:>3}  loss {loss:.4}");
    }
    println!("final loss {:.4}", history.last().unwrap());

    let path = std::env::temp_dir().join("floodlens-model.bin");
    save_model(&model, &path)?;
    let reloaded = load_model(&path)?;

    let test = EvalSet::from_scenes("test", &synthetic::corpus(Family::A, 5, 12))?;
    for ((x, truth), item) in training_data(&test)?.iter().zip(&test.items) {
        let d = predict(&reloaded, x)?;
        println!("{}  score {:.3}  predicted {:<11} truth {truth}", item.id, d.score, d.label.as_str());
    }
    Ok(())
}
