//! Flooded-region detection for UAV aerial imagery.
//!
//! Two detectors share one texture front end:
//!
//! * [`segmentation`] clusters pixels on LAB color plus Local Binary Pattern
//!   codes, finds the cluster whose LBP histogram is closest to a reference
//!   water signature (which may come from a different region), and calls the
//!   image flooded when that cluster covers more than a quarter of it.
//! * [`classifier`] is a seven-layer fully connected network over a
//!   512-dimensional two-scale LBP histogram.
//!
//! [`evaluation`] runs both over datasets and reports precision, recall, F1
//! and accuracy; [`cli`] wires everything into reproducible commands.

pub mod classifier;
pub mod cli;
pub mod error;
pub mod evaluation;
pub mod imaging;
pub mod segmentation;
pub mod synthetic;
pub mod texture;

use serde::{Deserialize, Serialize};

pub use error::{Error, Result};

/// Binary scene label; flooded is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FloodLabel {
    Flooded,
    NonFlooded,
}

impl FloodLabel {
    pub fn is_flooded(self) -> bool {
        self == FloodLabel::Flooded
    }

    pub fn from_flag(flooded: bool) -> Self {
        if flooded {
            FloodLabel::Flooded
        } else {
            FloodLabel::NonFlooded
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FloodLabel::Flooded => "flooded",
            FloodLabel::NonFlooded => "non-flooded",
        }
    }
}

impl std::fmt::Display for FloodLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
