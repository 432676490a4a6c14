//! A trained network together with the input conventions it was trained on.

use crate::error::{Error, Result};

use super::features::{FeatureLayout, FeatureScaler};
use super::mlp::{argmax, MlpParameters};

#[derive(Debug, Clone, PartialEq)]
pub struct AnnModel {
    pub params: MlpParameters,
    pub scaler: FeatureScaler,
    pub layout: FeatureLayout,
}

impl AnnModel {
    pub fn new(params: MlpParameters, scaler: FeatureScaler, layout: FeatureLayout) -> Result<Self> {
        let inputs = params.shape().inputs;
        if scaler.len() != inputs || layout.inputs() != inputs {
            return Err(Error::ShapeMismatch {
                expected: format!("{inputs} inputs for {}", params.shape()),
                found: format!(
                    "{} normalization entries, {} layout of {} inputs",
                    scaler.len(),
                    layout,
                    layout.inputs()
                ),
            });
        }
        Ok(Self {
            params,
            scaler,
            layout,
        })
    }

    /// Class probabilities for unnormalized features in the model's layout.
    pub fn probabilities(&self, raw: &[f64]) -> Vec<f64> {
        let mut x = raw.to_vec();
        self.scaler.apply(&mut x);
        self.params.forward(&x)
    }

    /// Argmax class; the lowest index wins ties.
    pub fn classify(&self, raw: &[f64]) -> usize {
        argmax(&self.probabilities(raw))
    }
}
