//! Logistic regression fitted by full-batch gradient ascent.
//!
//! The objective is the mean log-likelihood minus a small ridge term on the
//! augmented parameter vector `[w, b]`:
//!
//! `l(t) = (1/n) sum_i [y_i z_i - ln(1 + e^{z_i})] - (lambda/2) |t|^2`, `z_i = t . [x_i, 1]`.
//!
//! The ridge term keeps the optimum finite on separable data.

use super::{
    check_dimension, check_samples, require_both_classes, Classifier, Label, LabeledSample,
};
use crate::{Error, Result};

/// Ridge strength on `[w, b]`.
pub const L2_PENALTY: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticConfig {
    pub learning_rate: f64,
    pub max_iters: usize,
    /// Stop once the gradient's infinity norm drops below this.
    pub tol: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            learning_rate: 0.1,
            max_iters: 10_000,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    weights: Vec<f64>,
    bias: f64,
}

impl LogisticModel {
    pub fn new(weights: Vec<f64>, bias: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::ModelIntegrity(
                "logistic model has no weights".into(),
            ));
        }
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::ModelIntegrity(
                "logistic model has non-finite parameters".into(),
            ));
        }
        Ok(LogisticModel { weights, bias })
    }

    /// The all-zero model, which predicts probability 0.5 everywhere.
    pub fn zeros(dimension: usize) -> Self {
        LogisticModel {
            weights: vec![0.0; dimension],
            bias: 0.0,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// `w . x + b`.
    pub fn logit(&self, x: &[f64]) -> Result<f64> {
        check_dimension(self.weights.len(), x)?;
        Ok(dot(&self.weights, x) + self.bias)
    }

    /// Estimated probability that `x` is real.
    pub fn probability(&self, x: &[f64]) -> Result<f64> {
        Ok(sigmoid(self.logit(x)?))
    }

    /// Label and probability; probability exactly 0.5 maps to real.
    pub fn predict_with_probability(&self, x: &[f64]) -> Result<(Label, f64)> {
        let p = self.probability(x)?;
        let label = if p >= 0.5 { Label::Real } else { Label::Fake };
        Ok((label, p))
    }
}

impl Classifier for LogisticModel {
    fn dimension(&self) -> usize {
        self.weights.len()
    }

    fn decision_value(&self, x: &[f64]) -> Result<f64> {
        self.logit(x)
    }

    fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok(self.predict_with_probability(x)?.0)
    }
}

/// Training outcome with the objective after every accepted step.
#[derive(Debug, Clone)]
pub struct LogisticFit {
    pub model: LogisticModel,
    pub iterations: usize,
    pub converged: bool,
    /// Objective at the start and after each accepted step.
    pub objective_trace: Vec<f64>,
}

pub fn lr_train(samples: &[LabeledSample], cfg: &LogisticConfig) -> Result<LogisticModel> {
    Ok(lr_train_traced(samples, cfg)?.model)
}

/// Gradient ascent from zero. A step that would lower the objective is
/// retried with half the learning rate, and the reduced rate is kept.
pub fn lr_train_traced(samples: &[LabeledSample], cfg: &LogisticConfig) -> Result<LogisticFit> {
    let d = check_samples(samples)?;
    require_both_classes(samples)?;
    if !(cfg.learning_rate > 0.0 && cfg.learning_rate.is_finite()) {
        return Err(Error::Parameter(format!(
            "learning rate must be positive, got {}",
            cfg.learning_rate
        )));
    }
    if !(cfg.tol > 0.0) {
        return Err(Error::Parameter(format!(
            "tolerance must be positive, got {}",
            cfg.tol
        )));
    }

    let mut theta = vec![0.0; d + 1];
    let mut objective = log_likelihood(&theta, samples);
    let mut trace = vec![objective];
    let mut step = cfg.learning_rate;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        let grad = log_likelihood_gradient(&theta, samples);
        if grad.iter().fold(0.0f64, |m, g| m.max(g.abs())) < cfg.tol {
            converged = true;
            break;
        }
        iterations += 1;
        let mut accepted = false;
        for _ in 0..60 {
            let candidate: Vec<f64> = theta.iter().zip(&grad).map(|(t, g)| t + step * g).collect();
            let value = log_likelihood(&candidate, samples);
            if value >= objective {
                theta = candidate;
                objective = value;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // no ascent possible at machine precision
            converged = true;
            break;
        }
        trace.push(objective);
    }

    let bias = theta.pop().unwrap_or(0.0);
    Ok(LogisticFit {
        model: LogisticModel::new(theta, bias)?,
        iterations,
        converged,
        objective_trace: trace,
    })
}

/// Penalised mean log-likelihood at `theta = [w, b]`.
pub fn log_likelihood(theta: &[f64], samples: &[LabeledSample]) -> f64 {
    let d = theta.len() - 1;
    let n = samples.len() as f64;
    let data: f64 = samples
        .iter()
        .map(|s| {
            let z = dot(&theta[..d], &s.features) + theta[d];
            let y = s.label.as_u8() as f64;
            y * z - softplus(z)
        })
        .sum();
    data / n - 0.5 * L2_PENALTY * dot(theta, theta)
}

/// Gradient of [`log_likelihood`]: `(1/n) sum (y - h) [x, 1] - lambda t`.
pub fn log_likelihood_gradient(theta: &[f64], samples: &[LabeledSample]) -> Vec<f64> {
    let d = theta.len() - 1;
    let n = samples.len() as f64;
    let mut grad = vec![0.0; d + 1];
    for s in samples {
        let z = dot(&theta[..d], &s.features) + theta[d];
        let residual = s.label.as_u8() as f64 - sigmoid(z);
        for (g, x) in grad.iter_mut().zip(&s.features) {
            *g += residual * x;
        }
        grad[d] += residual;
    }
    for (g, t) in grad.iter_mut().zip(theta) {
        *g = *g / n - L2_PENALTY * t;
    }
    grad
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
