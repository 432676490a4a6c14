//! The student network: an 8-15-7 perceptron trained by scaled conjugate
//! gradient to reproduce the predictive controller's vector choice.

pub mod features;
pub mod mlp;
pub mod model;
pub mod model_io;
pub mod scg;
pub mod train;

pub use features::{FeatureLayout, FeatureScaler, BASE_FEATURES};
pub use mlp::{argmax, Activation, MlpParameters, Shape, DEFAULT_HIDDEN, NUM_CLASSES};
pub use model::AnnModel;
pub use model_io::{load_model, load_model_with_shape, save_model};
pub use scg::{Objective, Scg, ScgOptions, StepOutcome};
pub use train::{train_scg, train_scg_with_progress, Samples, StopReason, TrainConfig, TrainReport};
