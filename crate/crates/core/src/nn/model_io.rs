//! Binary model file.
//!
//! All integers and floats are little-endian:
//!
//! | bytes | field |
//! |---|---|
//! | 8 | magic `INVSIMNN` |
//! | 4 | format version (u32, currently 1) |
//! | 4 × 3 | inputs, hidden, outputs (u32) |
//! | 1 | hidden activation (0 tanh, 1 logistic) |
//! | 1 | feature layout (0 base, 1 delayed) |
//! | 2 | reserved, zero |
//! | 8 × inputs | normalization means (f64) |
//! | 8 × inputs | normalization scales (f64) |
//! | 8 × P | weights in flat order w1, b1, w2, b2, matrices row-major (f64) |
//!
//! Nothing may follow the weights.

use std::path::Path;

use crate::error::{Error, Result};

use super::features::{FeatureLayout, FeatureScaler};
use super::mlp::{Activation, MlpParameters, Shape};
use super::model::AnnModel;

pub const MAGIC: &[u8; 8] = b"INVSIMNN";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 12 + 4;

pub fn encode_model(model: &AnnModel) -> Vec<u8> {
    let shape = model.params.shape();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * (2 * shape.inputs + shape.num_params()));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for d in [shape.inputs, shape.hidden, shape.outputs] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out.push(model.params.activation().tag());
    out.push(model.layout.tag());
    out.extend_from_slice(&[0, 0]);
    for v in model
        .scaler
        .mean
        .iter()
        .chain(&model.scaler.scale)
        .chain(model.params.weights())
    {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Format(format!(
                "truncated model file: {what} needs {n} bytes at offset {}, only {} remain",
                self.pos,
                self.buf.len() - self.pos
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        let bytes = self.take(8 * n, what)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn decode_model(buf: &[u8]) -> Result<AnnModel> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(8, "magic")? != MAGIC {
        return Err(Error::Format("not a model file (bad magic)".into()));
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(Error::Format(format!(
            "unsupported model format version {version}, expected {VERSION}"
        )));
    }
    let inputs = r.u32("input width")? as usize;
    let hidden = r.u32("hidden width")? as usize;
    let outputs = r.u32("output width")? as usize;
    let shape = Shape::new(inputs, hidden, outputs);
    let tags = r.take(4, "tags")?;
    let activation = Activation::from_tag(tags[0])
        .ok_or_else(|| Error::Format(format!("unknown activation tag {}", tags[0])))?;
    let layout = FeatureLayout::from_tag(tags[1])
        .ok_or_else(|| Error::Format(format!("unknown feature layout tag {}", tags[1])))?;
    if tags[2] != 0 || tags[3] != 0 {
        return Err(Error::Format("reserved header bytes are not zero".into()));
    }
    let mean = r.f64s(inputs, "normalization means")?;
    let scale = r.f64s(inputs, "normalization scales")?;
    let weights = r.f64s(shape.num_params(), "weights")?;
    if r.pos != buf.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes after the weights",
            buf.len() - r.pos
        )));
    }
    let params = MlpParameters::from_weights(shape, activation, weights)?;
    AnnModel::new(params, FeatureScaler { mean, scale }, layout)
}

pub fn save_model(path: &Path, model: &AnnModel) -> Result<()> {
    std::fs::write(path, encode_model(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<AnnModel> {
    let buf = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&buf).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Loads a model and requires it to have exactly `expected` layer widths.
pub fn load_model_with_shape(path: &Path, expected: Shape) -> Result<AnnModel> {
    let model = load_model(path)?;
    let found = model.params.shape();
    if found != expected {
        return Err(Error::ShapeMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        });
    }
    Ok(model)
}
