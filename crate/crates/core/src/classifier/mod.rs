//! Fully connected flood classifier over two-scale LBP histograms.

mod io;
mod mlp;

pub use io::{load_model, model_from_bytes, model_to_bytes, save_model, FORMAT_VERSION, MAGIC};
pub use mlp::{
    gradient_check, mlp_init, predict, train, FloodDecision, ForwardCache, MlpModel, TrainConfig, LAYER_DIMS,
    N_LAYERS, SCORE_THRESHOLD,
};
