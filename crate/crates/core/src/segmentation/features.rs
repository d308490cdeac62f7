use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{LabImage, RgbImage};
use crate::texture::LbpMap;

/// Color representation used for the per-pixel features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Colorspace {
    #[default]
    Lab,
    Rgb,
}

impl Colorspace {
    pub fn as_str(self) -> &'static str {
        match self {
            Colorspace::Lab => "lab",
            Colorspace::Rgb => "rgb",
        }
    }
}

impl std::fmt::Display for Colorspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Colorspace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lab" => Ok(Colorspace::Lab),
            "rgb" => Ok(Colorspace::Rgb),
            other => Err(Error::InvalidParameter(format!("unknown colorspace {other:?}"))),
        }
    }
}

/// Row-major `n x dim` matrix of per-pixel features, one row per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelFeatureMatrix {
    n: usize,
    dim: usize,
    rows: Vec<f64>,
}

impl PixelFeatureMatrix {
    pub fn new(dim: usize, rows: Vec<f64>) -> Result<Self> {
        if dim == 0 || !rows.len().is_multiple_of(dim) {
            return Err(Error::mismatch(format!("multiple of {dim}"), rows.len()));
        }
        Ok(Self {
            n: rows.len() / dim,
            dim,
            rows,
        })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::mismatch(format!("points of dim {dim}"), "ragged points"));
        }
        Self::new(dim, points.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.rows.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.rows
    }
}

fn assemble(
    colors: impl Iterator<Item = [f64; 3]>,
    lbp: &LbpMap,
    use_texture: bool,
) -> PixelFeatureMatrix {
    let dim = if use_texture { 4 } else { 3 };
    let mut rows = Vec::with_capacity(lbp.len() * dim);
    for (color, &code) in colors.zip(lbp.codes()) {
        rows.extend_from_slice(&color);
        if use_texture {
            rows.push(code as f64 / 255.0);
        }
    }
    PixelFeatureMatrix {
        n: lbp.len(),
        dim,
        rows,
    }
}

fn check_dims(w: usize, h: usize, lbp: &LbpMap) -> Result<()> {
    if (w, h) != (lbp.width(), lbp.height()) {
        return Err(Error::mismatch(
            format!("{}x{} (LBP interior)", lbp.width(), lbp.height()),
            format!("{w}x{h}"),
        ));
    }
    Ok(())
}

/// Per-pixel `(L/100, (a+128)/255, (b+128)/255[, code/255])`.
///
/// `lab` must already be cropped to the LBP interior window.
pub fn build_pixel_features(lab: &LabImage, lbp: &LbpMap, use_texture: bool) -> Result<PixelFeatureMatrix> {
    check_dims(lab.width(), lab.height(), lbp)?;
    let colors = lab.data().iter().map(|&[l, a, b]| {
        [
            (l / 100.0).clamp(0.0, 1.0),
            ((a + 128.0) / 255.0).clamp(0.0, 1.0),
            ((b + 128.0) / 255.0).clamp(0.0, 1.0),
        ]
    });
    Ok(assemble(colors, lbp, use_texture))
}

/// RGB variant: `(R/255, G/255, B/255[, code/255])` on the cropped image.
pub fn build_rgb_pixel_features(rgb: &RgbImage, lbp: &LbpMap, use_texture: bool) -> Result<PixelFeatureMatrix> {
    check_dims(rgb.width(), rgb.height(), lbp)?;
    let colors = rgb
        .pixels()
        .map(|p| p.map(|c| c as f64 / 255.0));
    Ok(assemble(colors, lbp, use_texture))
}
