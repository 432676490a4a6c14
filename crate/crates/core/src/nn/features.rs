//! Input feature layouts and the per-feature standardization stored with a
//! trained model.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw measurement features per sampling instant:
/// `(i_fα, i_fβ, v_cα, v_cβ, i_oα, i_oβ, v*α, v*β)`.
pub const BASE_FEATURES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureLayout {
    /// The eight present-instant features.
    #[default]
    Base,
    /// Present features followed by those of the previous instant (zeros at
    /// the first instant of a run).
    Delayed,
}

impl FeatureLayout {
    pub fn inputs(self) -> usize {
        match self {
            FeatureLayout::Base => BASE_FEATURES,
            FeatureLayout::Delayed => 2 * BASE_FEATURES,
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            FeatureLayout::Base => 0,
            FeatureLayout::Delayed => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(FeatureLayout::Base),
            1 => Some(FeatureLayout::Delayed),
            _ => None,
        }
    }

    /// Assembles one network input from the present and previous raw rows.
    pub fn assemble(self, now: &[f64; BASE_FEATURES], prev: Option<&[f64; BASE_FEATURES]>, out: &mut Vec<f64>) {
        out.extend_from_slice(now);
        if self == FeatureLayout::Delayed {
            out.extend_from_slice(prev.unwrap_or(&[0.0; BASE_FEATURES]));
        }
    }
}

impl fmt::Display for FeatureLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureLayout::Base => "base",
            FeatureLayout::Delayed => "delayed",
        })
    }
}

/// Affine map x ↦ (x − mean)/scale applied per feature.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureScaler {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl FeatureScaler {
    pub fn identity(n: usize) -> Self {
        Self {
            mean: vec![0.0; n],
            scale: vec![1.0; n],
        }
    }

    /// Zero mean, unit variance over the rows of `xs`. Constant features get
    /// scale 1.
    pub fn fit(xs: &[f64], n: usize) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::EmptyBatch);
        }
        if n == 0 || xs.len() % n != 0 {
            return Err(Error::ShapeMismatch {
                expected: format!("rows of {n} features"),
                found: format!("{} values", xs.len()),
            });
        }
        let rows = (xs.len() / n) as f64;
        let mut mean = vec![0.0; n];
        for row in xs.chunks_exact(n) {
            for (m, x) in mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= rows);
        let mut var = vec![0.0; n];
        for row in xs.chunks_exact(n) {
            for ((v, x), m) in var.iter_mut().zip(row).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let scale = var
            .iter()
            .map(|v| {
                let s = (v / rows).sqrt();
                if s > 1e-12 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, scale })
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn apply(&self, x: &mut [f64]) {
        for ((m, s), v) in self.mean.iter().zip(&self.scale).zip(x.iter_mut()) {
            *v = (*v - m) / s;
        }
    }

    /// Applies the map to every row of a row-major batch.
    pub fn apply_rows(&self, xs: &mut [f64]) {
        for row in xs.chunks_exact_mut(self.len()) {
            self.apply(row);
        }
    }
}
