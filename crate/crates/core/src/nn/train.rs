//! Full-batch SCG training with validation-based early stopping.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::features::{FeatureLayout, FeatureScaler};
use super::mlp::{Activation, MlpParameters, Shape, DEFAULT_HIDDEN, NUM_CLASSES};
use super::model::AnnModel;
use super::scg::{Objective, Scg, ScgOptions, StepOutcome};

/// Row-major feature matrix with one class label per row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Samples {
    pub inputs: usize,
    pub x: Vec<f64>,
    pub y: Vec<u8>,
}

impl Samples {
    pub fn new(inputs: usize) -> Self {
        Self {
            inputs,
            x: Vec::new(),
            y: Vec::new(),
        }
    }

    pub fn push(&mut self, features: &[f64], target: u8) {
        assert_eq!(features.len(), self.inputs, "feature row width");
        self.x.extend_from_slice(features);
        self.y.push(target);
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.inputs..(i + 1) * self.inputs]
    }

    pub fn subset(&self, idx: &[usize]) -> Samples {
        let mut out = Samples::new(self.inputs);
        out.x.reserve(idx.len() * self.inputs);
        for &i in idx {
            out.push(self.row(i), self.y[i]);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub max_epochs: usize,
    /// Fraction of rows used for fitting.
    pub train_fraction: f64,
    /// Fraction of rows monitored for early stopping; the rest is the test
    /// split. Zero disables the validation split and monitors training loss.
    pub validation_fraction: f64,
    pub patience: usize,
    pub seed: u64,
    pub hidden: usize,
    pub activation: Activation,
    pub layout: FeatureLayout,
    pub sigma: f64,
    pub lambda: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_epochs: 2000,
            train_fraction: 0.7,
            validation_fraction: 0.15,
            patience: 50,
            seed: 1,
            hidden: DEFAULT_HIDDEN,
            activation: Activation::Tanh,
            layout: FeatureLayout::Base,
            sigma: 1e-4,
            lambda: 1e-6,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let f = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParameter(msg.to_string()))
            }
        };
        f(self.train_fraction > 0.0 && self.train_fraction <= 1.0, "train fraction must be in (0, 1]")?;
        f(
            self.validation_fraction >= 0.0 && self.train_fraction + self.validation_fraction <= 1.0,
            "validation fraction must be in [0, 1 − train fraction]",
        )?;
        f(self.patience >= 1, "patience must be at least 1")?;
        f(self.hidden >= 1, "hidden layer needs at least one unit")?;
        f(self.sigma > 0.0 && self.lambda > 0.0, "SCG σ and λ must be positive")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    EarlyStopping,
    MaxEpochs,
    Converged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub monitor_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitMetrics {
    pub rows: usize,
    pub loss: Option<f64>,
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub shape: String,
    pub final_epoch: usize,
    pub stop_reason: StopReason,
    pub best_epoch: usize,
    /// Minimum monitored loss (validation, or training without a
    /// validation split).
    pub best_val_loss: f64,
    pub val_loss_at_stop: f64,
    pub initial_train_loss: f64,
    pub train: SplitMetrics,
    pub validation: SplitMetrics,
    pub test: SplitMetrics,
    pub history: Vec<EpochLog>,
}

struct BatchObjective<'a> {
    shape: Shape,
    activation: Activation,
    data: &'a Samples,
}

impl Objective for BatchObjective<'_> {
    fn dim(&self) -> usize {
        self.shape.num_params()
    }

    fn value_and_gradient(&self, w: &[f64]) -> Result<(f64, Vec<f64>)> {
        MlpParameters::from_raw(self.shape, self.activation, w.to_vec())
            .loss_and_gradient(&self.data.x, &self.data.y)
    }
}

/// Seeded 70/15/15-style partition of row indices.
pub fn split_indices(n: usize, cfg: &TrainConfig) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    let n_train = ((n as f64 * cfg.train_fraction).round() as usize).clamp(1.min(n), n);
    let n_val = ((n as f64 * cfg.validation_fraction).round() as usize).min(n - n_train);
    let test = idx.split_off(n_train + n_val);
    let val = idx.split_off(n_train);
    (idx, val, test)
}

fn metrics(p: &MlpParameters, s: &Samples) -> Result<SplitMetrics> {
    if s.is_empty() {
        return Ok(SplitMetrics {
            rows: 0,
            loss: None,
            accuracy: None,
        });
    }
    Ok(SplitMetrics {
        rows: s.len(),
        loss: Some(p.loss(&s.x, &s.y)?),
        accuracy: Some(p.accuracy(&s.x, &s.y)?),
    })
}

pub fn train_scg(data: &Samples, cfg: &TrainConfig) -> Result<(AnnModel, TrainReport)> {
    train_scg_with_progress(data, cfg, |_| {})
}

/// [`train_scg`] with a callback after every epoch.
pub fn train_scg_with_progress(
    data: &Samples,
    cfg: &TrainConfig,
    mut progress: impl FnMut(&EpochLog),
) -> Result<(AnnModel, TrainReport)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if data.inputs != cfg.layout.inputs() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} features for the {} layout", cfg.layout.inputs(), cfg.layout),
            found: format!("{} features", data.inputs),
        });
    }
    let shape = Shape::new(data.inputs, cfg.hidden, NUM_CLASSES);

    let (tr, va, te) = split_indices(data.len(), cfg);
    let mut train = data.subset(&tr);
    let mut val = data.subset(&va);
    let mut test = data.subset(&te);
    let scaler = FeatureScaler::fit(&train.x, data.inputs)?;
    for s in [&mut train, &mut val, &mut test] {
        scaler.apply_rows(&mut s.x);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    let init = MlpParameters::random(shape, cfg.activation, &mut rng)?;
    let obj = BatchObjective {
        shape,
        activation: cfg.activation,
        data: &train,
    };
    let opts = ScgOptions {
        sigma: cfg.sigma,
        lambda: cfg.lambda,
    };
    let mut scg = Scg::new(&obj, init.weights().to_vec(), opts)?;
    let initial_train_loss = scg.value();

    let monitor = |w: &[f64], train_loss: f64| -> Result<f64> {
        if val.is_empty() {
            Ok(train_loss)
        } else {
            MlpParameters::from_raw(shape, cfg.activation, w.to_vec()).loss(&val.x, &val.y)
        }
    };

    let mut best_loss = monitor(scg.weights(), scg.value())?;
    let mut best_epoch = 0;
    let mut best_w = scg.weights().to_vec();
    let mut last_loss = best_loss;
    let mut history = vec![EpochLog {
        epoch: 0,
        train_loss: initial_train_loss,
        monitor_loss: best_loss,
    }];
    progress(&history[0]);

    let mut epoch = 0;
    let mut stop = StopReason::MaxEpochs;
    while epoch < cfg.max_epochs {
        epoch += 1;
        let outcome = scg.step(&obj).map_err(|e| match e {
            Error::TrainingDiverged { reason, .. } => Error::TrainingDiverged { epoch, reason },
            other => other,
        })?;
        let m = monitor(scg.weights(), scg.value())?;
        if !m.is_finite() {
            return Err(Error::TrainingDiverged {
                epoch,
                reason: format!("monitored loss became {m}"),
            });
        }
        last_loss = m;
        let log = EpochLog {
            epoch,
            train_loss: scg.value(),
            monitor_loss: m,
        };
        progress(&log);
        history.push(log);
        if m < best_loss {
            best_loss = m;
            best_epoch = epoch;
            best_w.copy_from_slice(scg.weights());
        }
        if outcome == StepOutcome::Converged {
            stop = StopReason::Converged;
            break;
        }
        if epoch - best_epoch >= cfg.patience {
            stop = StopReason::EarlyStopping;
            break;
        }
    }

    let params = MlpParameters::from_weights(shape, cfg.activation, best_w)?;
    let report = TrainReport {
        shape: shape.to_string(),
        final_epoch: epoch,
        stop_reason: stop,
        best_epoch,
        best_val_loss: best_loss,
        val_loss_at_stop: last_loss,
        initial_train_loss,
        train: metrics(&params, &train)?,
        validation: metrics(&params, &val)?,
        test: metrics(&params, &test)?,
        history,
    };
    Ok((AnnModel::new(params, scaler, cfg.layout)?, report))
}
