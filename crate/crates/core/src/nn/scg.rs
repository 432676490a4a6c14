//! Scaled conjugate gradient (Møller, 1993).
//!
//! Conjugate directions with the curvature along each direction estimated
//! by a one-sided gradient difference, and a Levenberg–Marquardt style
//! scale λ in place of a line search.

use crate::error::{Error, Result};

/// A differentiable scalar function of a flat parameter vector.
pub trait Objective {
    fn dim(&self) -> usize;

    fn value_and_gradient(&self, w: &[f64]) -> Result<(f64, Vec<f64>)>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScgOptions {
    /// Finite-difference scale for the curvature estimate.
    pub sigma: f64,
    /// Initial λ.
    pub lambda: f64,
}

impl Default for ScgOptions {
    fn default() -> Self {
        Self {
            sigma: 1e-4,
            lambda: 1e-6,
        }
    }
}

const LAMBDA_MIN: f64 = 1e-15;
const LAMBDA_MAX: f64 = 1e100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    /// The trial point reduced the objective and was accepted.
    Accepted,
    /// The trial point was rejected; λ was raised.
    Rejected,
    /// The gradient or search direction vanished.
    Converged,
}

/// Optimizer state; each call to [`Scg::step`] is one iteration.
#[derive(Debug, Clone)]
pub struct Scg {
    opts: ScgOptions,
    w: Vec<f64>,
    f: f64,
    g: Vec<f64>,
    d: Vec<f64>,
    lambda: f64,
    success: bool,
    since_restart: usize,
    mu: f64,
    kappa: f64,
    theta: f64,
    iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Scg {
    pub fn new<O: Objective + ?Sized>(obj: &O, w0: Vec<f64>, opts: ScgOptions) -> Result<Self> {
        if w0.len() != obj.dim() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} parameters", obj.dim()),
                found: format!("{} parameters", w0.len()),
            });
        }
        if !(opts.sigma > 0.0 && opts.lambda > 0.0) {
            return Err(Error::InvalidParameter("SCG σ and λ must be positive".into()));
        }
        let (f, g) = obj.value_and_gradient(&w0)?;
        if !f.is_finite() {
            return Err(Error::TrainingDiverged {
                epoch: 0,
                reason: format!("initial objective is {f}"),
            });
        }
        let d = g.iter().map(|x| -x).collect();
        Ok(Self {
            opts,
            w: w0,
            f,
            g,
            d,
            lambda: opts.lambda,
            success: true,
            since_restart: 0,
            mu: 0.0,
            kappa: 0.0,
            theta: 0.0,
            iterations: 0,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn value(&self) -> f64 {
        self.f
    }

    pub fn gradient(&self) -> &[f64] {
        &self.g
    }

    pub fn gradient_norm(&self) -> f64 {
        dot(&self.g, &self.g).sqrt()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn step<O: Objective + ?Sized>(&mut self, obj: &O) -> Result<StepOutcome> {
        self.iterations += 1;
        let n = self.w.len();

        if self.success {
            self.mu = dot(&self.d, &self.g);
            if self.mu >= 0.0 {
                self.d.iter_mut().zip(&self.g).for_each(|(d, g)| *d = -g);
                self.mu = dot(&self.d, &self.g);
            }
            self.kappa = dot(&self.d, &self.d);
            if self.kappa < f64::EPSILON * f64::EPSILON || self.mu == 0.0 {
                return Ok(StepOutcome::Converged);
            }
            let sigma = self.opts.sigma / self.kappa.sqrt();
            let probe: Vec<f64> = self.w.iter().zip(&self.d).map(|(w, d)| w + sigma * d).collect();
            let (_, g_probe) = obj.value_and_gradient(&probe)?;
            self.theta = self
                .d
                .iter()
                .zip(g_probe.iter().zip(&self.g))
                .map(|(d, (gp, g))| d * (gp - g))
                .sum::<f64>()
                / sigma;
        }

        // make the scaled curvature positive
        let mut delta = self.theta + self.lambda * self.kappa;
        if delta <= 0.0 {
            delta = self.lambda * self.kappa;
            self.lambda -= self.theta / self.kappa;
        }
        let alpha = -self.mu / delta;

        let trial: Vec<f64> = self.w.iter().zip(&self.d).map(|(w, d)| w + alpha * d).collect();
        let (f_new, g_new) = obj.value_and_gradient(&trial)?;
        if !f_new.is_finite() {
            return Err(Error::TrainingDiverged {
                epoch: self.iterations,
                reason: format!(
                    "objective became {f_new} (step α = {alpha:.3e}, λ = {:.3e})",
                    self.lambda
                ),
            });
        }
        // ratio of actual to predicted reduction
        let comparison = 2.0 * (f_new - self.f) / (alpha * self.mu);
        let accepted = comparison >= 0.0;

        let mut outcome = StepOutcome::Rejected;
        if accepted {
            let g_old = std::mem::replace(&mut self.g, g_new);
            self.w = trial;
            self.f = f_new;
            self.success = true;
            self.since_restart += 1;
            outcome = StepOutcome::Accepted;
            if dot(&self.g, &self.g) == 0.0 {
                return Ok(StepOutcome::Converged);
            }
            if self.since_restart >= n {
                self.d.iter_mut().zip(&self.g).for_each(|(d, g)| *d = -g);
                self.since_restart = 0;
            } else {
                let beta = (dot(&g_old, &self.g) - dot(&self.g, &self.g)) / self.mu;
                self.d
                    .iter_mut()
                    .zip(&self.g)
                    .for_each(|(d, g)| *d = beta * *d - g);
            }
        } else {
            self.success = false;
        }

        if comparison < 0.25 {
            self.lambda = (4.0 * self.lambda).min(LAMBDA_MAX);
        }
        if comparison > 0.75 {
            self.lambda = (0.5 * self.lambda).max(LAMBDA_MIN);
        }
        Ok(outcome)
    }
}
