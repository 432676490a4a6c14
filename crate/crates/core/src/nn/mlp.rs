//! One-hidden-layer perceptron with a softmax output over the seven inverter
//! vectors.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of classes: one per distinct inverter voltage vector.
pub const NUM_CLASSES: usize = 7;

/// Hidden units in the reference architecture.
pub const DEFAULT_HIDDEN: usize = 15;

/// Samples per partial sum in batch reductions. Fixed so results do not
/// depend on anything but the data order.
const CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Tanh,
    Logistic,
}

impl Activation {
    #[inline]
    pub fn apply(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => a.tanh(),
            Activation::Logistic => 1.0 / (1.0 + (-a).exp()),
        }
    }

    /// Derivative expressed through the activation output `h`.
    #[inline]
    pub fn derivative_from_output(self, h: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - h * h,
            Activation::Logistic => h * (1.0 - h),
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            Activation::Tanh => 0,
            Activation::Logistic => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Activation::Tanh),
            1 => Some(Activation::Logistic),
            _ => None,
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Tanh => "tanh",
            Activation::Logistic => "logistic",
        })
    }
}

/// Layer widths, displayed as `8-15-7`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub inputs: usize,
    pub hidden: usize,
    pub outputs: usize,
}

impl Shape {
    pub const fn new(inputs: usize, hidden: usize, outputs: usize) -> Self {
        Self {
            inputs,
            hidden,
            outputs,
        }
    }

    pub fn num_params(&self) -> usize {
        self.hidden * self.inputs + self.hidden + self.outputs * self.hidden + self.outputs
    }

    fn validate(&self) -> Result<()> {
        if self.inputs == 0 || self.hidden == 0 || self.outputs < 2 {
            return Err(Error::InvalidParameter(format!("degenerate network shape {self}")));
        }
        Ok(())
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}-{}", self.inputs, self.hidden, self.outputs)
    }
}

/// Network weights stored flat as `[w1 (hidden×inputs, row-major), b1,
/// w2 (outputs×hidden, row-major), b2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParameters {
    shape: Shape,
    activation: Activation,
    weights: Vec<f64>,
}

impl MlpParameters {
    pub fn zeros(shape: Shape, activation: Activation) -> Result<Self> {
        shape.validate()?;
        Ok(Self {
            shape,
            activation,
            weights: vec![0.0; shape.num_params()],
        })
    }

    pub fn from_weights(shape: Shape, activation: Activation, weights: Vec<f64>) -> Result<Self> {
        shape.validate()?;
        if weights.len() != shape.num_params() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} weights for {shape}", shape.num_params()),
                found: format!("{} weights", weights.len()),
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter("non-finite network weight".into()));
        }
        Ok(Self {
            shape,
            activation,
            weights,
        })
    }

    /// Unchecked constructor for optimizer trial points, which may hold
    /// non-finite values.
    pub(crate) fn from_raw(shape: Shape, activation: Activation, weights: Vec<f64>) -> Self {
        debug_assert_eq!(weights.len(), shape.num_params());
        Self {
            shape,
            activation,
            weights,
        }
    }

    /// Uniform in ±1/√fan_in per layer, biases included.
    pub fn random<R: Rng>(shape: Shape, activation: Activation, rng: &mut R) -> Result<Self> {
        let mut p = Self::zeros(shape, activation)?;
        let first = shape.hidden * shape.inputs + shape.hidden;
        let r1 = 1.0 / (shape.inputs as f64).sqrt();
        let r2 = 1.0 / (shape.hidden as f64).sqrt();
        for (i, w) in p.weights.iter_mut().enumerate() {
            let r = if i < first { r1 } else { r2 };
            *w = rng.gen_range(-r..r);
        }
        Ok(p)
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn set_weights(&mut self, w: &[f64]) {
        self.weights.copy_from_slice(w);
    }

    fn split(&self) -> (&[f64], &[f64], &[f64], &[f64]) {
        split_layers(self.shape, &self.weights)
    }

    /// Class probabilities for one input row.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut h = vec![0.0; self.shape.hidden];
        let mut p = vec![0.0; self.shape.outputs];
        self.forward_into(x, &mut h, &mut p);
        p
    }

    /// Row-wise [`forward`](Self::forward) over a row-major batch.
    pub fn forward_batch(&self, xs: &[f64]) -> Vec<Vec<f64>> {
        xs.chunks_exact(self.shape.inputs).map(|x| self.forward(x)).collect()
    }

    fn forward_into(&self, x: &[f64], h: &mut [f64], p: &mut [f64]) {
        debug_assert_eq!(x.len(), self.shape.inputs);
        let (w1, b1, w2, b2) = self.split();
        let n = self.shape.inputs;
        for (j, hj) in h.iter_mut().enumerate() {
            let row = &w1[j * n..(j + 1) * n];
            let a = b1[j] + row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>();
            *hj = self.activation.apply(a);
        }
        let m = self.shape.hidden;
        for (k, pk) in p.iter_mut().enumerate() {
            let row = &w2[k * m..(k + 1) * m];
            *pk = b2[k] + row.iter().zip(h.iter()).map(|(w, hj)| w * hj).sum::<f64>();
        }
        softmax_in_place(p);
    }

    /// Most probable class; the lowest index wins ties.
    pub fn classify(&self, x: &[f64]) -> usize {
        argmax(&self.forward(x))
    }

    /// Mean cross-entropy of a row-major batch against class labels.
    pub fn loss(&self, xs: &[f64], targets: &[u8]) -> Result<f64> {
        let n = self.check_batch(xs, targets)?;
        let mut h = vec![0.0; self.shape.hidden];
        let mut p = vec![0.0; self.shape.outputs];
        let mut total = 0.0;
        for (xc, tc) in xs
            .chunks(CHUNK * self.shape.inputs)
            .zip(targets.chunks(CHUNK))
        {
            let mut part = 0.0;
            for (x, &t) in xc.chunks_exact(self.shape.inputs).zip(tc) {
                self.forward_into(x, &mut h, &mut p);
                part -= p[t as usize].max(f64::MIN_POSITIVE).ln();
            }
            total += part;
        }
        Ok(total / n as f64)
    }

    /// Mean cross-entropy and its gradient in the flat weight layout.
    pub fn loss_and_gradient(&self, xs: &[f64], targets: &[u8]) -> Result<(f64, Vec<f64>)> {
        let n = self.check_batch(xs, targets)?;
        let shape = self.shape;
        let (ni, nh, no) = (shape.inputs, shape.hidden, shape.outputs);
        let (_, _, w2, _) = self.split();

        let mut grad = vec![0.0; shape.num_params()];
        let mut part = vec![0.0; shape.num_params()];
        let mut total = 0.0;
        let mut h = vec![0.0; nh];
        let mut p = vec![0.0; no];
        let mut dh = vec![0.0; nh];

        for (xc, tc) in xs.chunks(CHUNK * ni).zip(targets.chunks(CHUNK)) {
            part.iter_mut().for_each(|g| *g = 0.0);
            let mut part_loss = 0.0;
            {
                let (g1, rest) = part.split_at_mut(nh * ni);
                let (gb1, rest) = rest.split_at_mut(nh);
                let (g2, gb2) = rest.split_at_mut(no * nh);
                for (x, &t) in xc.chunks_exact(ni).zip(tc) {
                    self.forward_into(x, &mut h, &mut p);
                    let t = t as usize;
                    part_loss -= p[t].max(f64::MIN_POSITIVE).ln();
                    // softmax + cross-entropy: dL/dz = p − onehot
                    p[t] -= 1.0;
                    dh.iter_mut().for_each(|d| *d = 0.0);
                    for k in 0..no {
                        let dz = p[k];
                        gb2[k] += dz;
                        let row = &mut g2[k * nh..(k + 1) * nh];
                        let wrow = &w2[k * nh..(k + 1) * nh];
                        for j in 0..nh {
                            row[j] += dz * h[j];
                            dh[j] += dz * wrow[j];
                        }
                    }
                    for j in 0..nh {
                        let da = dh[j] * self.activation.derivative_from_output(h[j]);
                        gb1[j] += da;
                        let row = &mut g1[j * ni..(j + 1) * ni];
                        for i in 0..ni {
                            row[i] += da * x[i];
                        }
                    }
                }
            }
            total += part_loss;
            for (g, q) in grad.iter_mut().zip(&part) {
                *g += q;
            }
        }

        let inv = 1.0 / n as f64;
        grad.iter_mut().for_each(|g| *g *= inv);
        Ok((total * inv, grad))
    }

    /// Fraction of rows whose argmax equals the label.
    pub fn accuracy(&self, xs: &[f64], targets: &[u8]) -> Result<f64> {
        let n = self.check_batch(xs, targets)?;
        let mut h = vec![0.0; self.shape.hidden];
        let mut p = vec![0.0; self.shape.outputs];
        let hits = xs
            .chunks_exact(self.shape.inputs)
            .zip(targets)
            .filter(|(x, &t)| {
                self.forward_into(x, &mut h, &mut p);
                argmax(&p) == t as usize
            })
            .count();
        Ok(hits as f64 / n as f64)
    }

    fn check_batch(&self, xs: &[f64], targets: &[u8]) -> Result<usize> {
        if targets.is_empty() {
            return Err(Error::EmptyBatch);
        }
        if xs.len() != targets.len() * self.shape.inputs {
            return Err(Error::ShapeMismatch {
                expected: format!("{} features per row", self.shape.inputs),
                found: format!("{} values for {} rows", xs.len(), targets.len()),
            });
        }
        if let Some(&t) = targets.iter().find(|&&t| t as usize >= self.shape.outputs) {
            return Err(Error::InvalidParameter(format!(
                "class label {t} outside 0..{}",
                self.shape.outputs
            )));
        }
        Ok(targets.len())
    }
}

fn split_layers(shape: Shape, w: &[f64]) -> (&[f64], &[f64], &[f64], &[f64]) {
    let (w1, rest) = w.split_at(shape.hidden * shape.inputs);
    let (b1, rest) = rest.split_at(shape.hidden);
    let (w2, b2) = rest.split_at(shape.outputs * shape.hidden);
    (w1, b1, w2, b2)
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

/// Index of the largest entry; earliest index on ties.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}
