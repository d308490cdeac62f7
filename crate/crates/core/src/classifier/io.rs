//! Binary model files.
//!
//! Layout, little-endian throughout:
//!
//! ```text
//! magic        6 bytes  "FLMLP\0"
//! version      u16
//! dropout_rate f64
//! layer count  u32
//! per layer:   rows u32, cols u32, rows*cols f64 weights (row-major), rows f64 biases
//! ```

use std::path::Path;

use super::mlp::{MlpModel, LAYER_DIMS, N_LAYERS};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 6] = b"FLMLP\0";
pub const FORMAT_VERSION: u16 = 1;

pub fn model_to_bytes(model: &MlpModel) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + model.n_parameters() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&model.dropout_rate().to_le_bytes());
    out.extend_from_slice(&(N_LAYERS as u32).to_le_bytes());
    for l in 0..N_LAYERS {
        out.extend_from_slice(&(LAYER_DIMS[l + 1] as u32).to_le_bytes());
        out.extend_from_slice(&(LAYER_DIMS[l] as u32).to_le_bytes());
        for w in model.weights(l) {
            out.extend_from_slice(&w.to_le_bytes());
        }
        for b in model.biases(l) {
            out.extend_from_slice(&b.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Format(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = self.take(n.checked_mul(8).ok_or_else(|| Error::Format("size overflow".into()))?)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn model_from_bytes(buf: &[u8]) -> Result<MlpModel> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(MAGIC.len())? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = r.u16()?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dropout = f64::from_le_bytes(r.take(8)?.try_into().unwrap());
    let layers = r.u32()? as usize;

    let mut dims = Vec::new();
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for _ in 0..layers {
        let rows = r.u32()? as usize;
        let cols = r.u32()? as usize;
        let n = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::Format("size overflow".into()))?;
        weights.push(r.f64s(n)?);
        biases.push(r.f64s(rows)?);
        dims.push((rows, cols));
    }
    if r.pos != buf.len() {
        return Err(Error::Format(format!("{} trailing bytes", buf.len() - r.pos)));
    }

    let expected: Vec<(usize, usize)> = LAYER_DIMS.windows(2).map(|w| (w[1], w[0])).collect();
    if dims != expected {
        return Err(Error::Shape(format!(
            "layer shapes {dims:?} differ from the fixed architecture {expected:?}"
        )));
    }
    MlpModel::from_parts(weights, biases, dropout).map_err(|e| match e {
        Error::InvalidDropout(p) => Error::Format(format!("invalid dropout rate {p}")),
        other => other,
    })
}

pub fn save_model(model: &MlpModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model_to_bytes(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<MlpModel> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    model_from_bytes(&bytes)
}
