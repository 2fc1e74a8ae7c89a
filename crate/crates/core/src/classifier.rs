//! Hinge-loss linear classifier trained by deterministic full-batch
//! subgradient descent on standardized features.
//!
//! The objective is `(1/2)|w|^2 + C * mean_i hinge(y_i, w.x_i + b)` with
//! labels mapped to {-1, +1}. Steps follow the `1/(lambda t)` schedule with
//! `lambda = 1/C`, and the returned parameters are the running average of
//! the iterates.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::agent::{FeatureVector, Label};
use crate::error::{Error, Result};

const CHECKPOINT_EVERY: usize = 50;
const DEFAULT_GAMMA: f64 = 0.5;
/// Percentile of training `|raw|` that maps to a normalized distance of 1.
const NORMALIZING_PERCENTILE: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    pub c: f64,
    /// Kept for protocol fidelity with RBF-style configs; a linear model
    /// never reads it.
    pub gamma: f64,
    pub learning_rate: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            gamma: DEFAULT_GAMMA,
            learning_rate: 1.0,
            max_iterations: 2000,
            tolerance: 1e-9,
            seed: 0,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::config(format!(
                "classifier c must be > 0, got {}",
                self.c
            )));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::config(format!(
                "learning_rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::config("max_iterations must be >= 1"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::config(format!(
                "tolerance must be > 0, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaling {
    pub mean: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedClassifier {
    pub feature_names: Vec<String>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub feature_scaling: Vec<FeatureScaling>,
    /// 95th percentile of `|raw|` over the training set.
    pub q95: f64,
    pub training_loss: f64,
    pub iterations: usize,
    /// Objective of the averaged iterate at each checkpoint.
    pub loss_checkpoints: Vec<f64>,
    pub config: ClassifierConfig,
}

/// Signed distance from the hyperplane: `raw = w.x + b` on scaled features
/// and `normalized`, the raw value divided by the training `q95` and clamped
/// into [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginDistance {
    pub raw: f64,
    pub normalized: f64,
}

pub fn train(
    dataset: &[(FeatureVector, Label)],
    config: &ClassifierConfig,
) -> Result<TrainedClassifier> {
    config.validate()?;
    if config.gamma != DEFAULT_GAMMA {
        warn!(
            "classifier gamma={} is recorded but unused by the linear model",
            config.gamma
        );
    }
    let (first, _) = dataset
        .first()
        .ok_or_else(|| Error::invalid("training set is empty"))?;
    let dim = first.len();
    if let Some((i, (x, _))) = dataset
        .iter()
        .enumerate()
        .find(|(_, (x, _))| x.len() != dim)
    {
        return Err(Error::invalid(format!(
            "training row {i} has {} features, expected {dim}",
            x.len()
        )));
    }
    let positives = dataset.iter().filter(|(_, y)| y.is_positive()).count();
    if positives == 0 || positives == dataset.len() {
        return Err(Error::degenerate(format!(
            "training set needs both labels, got {positives} positive of {}",
            dataset.len()
        )));
    }

    let scaling = fit_scaling(dataset, dim);
    let xs: Vec<Vec<f64>> = dataset
        .iter()
        .map(|(x, _)| standardize(x.values(), &scaling))
        .collect();
    let ys: Vec<f64> = dataset.iter().map(|(_, y)| y.signed()).collect();
    let n = xs.len() as f64;
    let lambda = 1.0 / config.c;

    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut avg_w = vec![0.0; dim];
    let mut avg_b = 0.0;
    let mut grad_w = vec![0.0; dim];
    let mut checkpoints = Vec::new();
    let mut iterations = 0;

    for t in 1..=config.max_iterations {
        iterations = t;
        grad_w
            .iter_mut()
            .zip(&w)
            .for_each(|(g, wj)| *g = lambda * wj);
        let mut grad_b = 0.0;
        for (x, &y) in xs.iter().zip(&ys) {
            if y * (dot(&w, x) + b) < 1.0 {
                for (g, xj) in grad_w.iter_mut().zip(x) {
                    *g -= y * xj / n;
                }
                grad_b -= y / n;
            }
        }
        let step = config.learning_rate / (lambda * t as f64);
        for (wj, g) in w.iter_mut().zip(&grad_w) {
            *wj -= step * g;
        }
        b -= step * grad_b;

        let k = t as f64;
        for (a, wj) in avg_w.iter_mut().zip(&w) {
            *a += (wj - *a) / k;
        }
        avg_b += (b - avg_b) / k;

        if t % CHECKPOINT_EVERY == 0 {
            let loss = objective(&avg_w, avg_b, &xs, &ys, config.c);
            let converged = checkpoints.last().is_some_and(|prev: &f64| {
                (prev - loss).abs() <= config.tolerance * prev.abs().max(1.0)
            });
            checkpoints.push(loss);
            if converged {
                break;
            }
        }
    }

    let training_loss = objective(&avg_w, avg_b, &xs, &ys, config.c);
    let mut abs_raw: Vec<f64> = xs.iter().map(|x| (dot(&avg_w, x) + avg_b).abs()).collect();
    let q95 = match percentile(&mut abs_raw, NORMALIZING_PERCENTILE) {
        q if q > 0.0 => q,
        _ => 1.0,
    };

    Ok(TrainedClassifier {
        feature_names: first.names().to_vec(),
        weights: avg_w,
        bias: avg_b,
        feature_scaling: scaling,
        q95,
        training_loss,
        iterations,
        loss_checkpoints: checkpoints,
        config: config.clone(),
    })
}

impl TrainedClassifier {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn margin(&self, x: &FeatureVector) -> Result<MarginDistance> {
        let raw = self.raw_score(x)?;
        Ok(MarginDistance {
            raw,
            normalized: (raw / self.q95).clamp(-1.0, 1.0),
        })
    }

    /// Approve iff the raw margin is strictly positive; ties deny.
    pub fn predict(&self, x: &FeatureVector) -> Result<Label> {
        Ok(Label::from_bool(self.raw_score(x)? > 0.0))
    }

    pub fn raw_score(&self, x: &FeatureVector) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::invalid(format!(
                "feature vector has {} values, model expects {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(dot(
            &self.weights,
            &standardize(x.values(), &self.feature_scaling),
        ) + self.bias)
    }

    /// Weight vector scaled to unit norm, for comparing boundaries.
    pub fn normalized_weights(&self) -> Vec<f64> {
        let mut v = self.weights.clone();
        v.push(self.bias);
        let norm = dot(&v, &v).sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}

fn fit_scaling(dataset: &[(FeatureVector, Label)], dim: usize) -> Vec<FeatureScaling> {
    let n = dataset.len() as f64;
    (0..dim)
        .map(|j| {
            let mean = dataset.iter().map(|(x, _)| x.values()[j]).sum::<f64>() / n;
            let var = dataset
                .iter()
                .map(|(x, _)| (x.values()[j] - mean).powi(2))
                .sum::<f64>()
                / n;
            let sd = var.sqrt();
            FeatureScaling {
                mean,
                scale: if sd > 1e-12 { sd } else { 1.0 },
            }
        })
        .collect()
}

fn standardize(values: &[f64], scaling: &[FeatureScaling]) -> Vec<f64> {
    values
        .iter()
        .zip(scaling)
        .map(|(v, s)| (v - s.mean) / s.scale)
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn objective(w: &[f64], b: f64, xs: &[Vec<f64>], ys: &[f64], c: f64) -> f64 {
    let hinge: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (1.0 - y * (dot(w, x) + b)).max(0.0))
        .sum::<f64>()
        / xs.len() as f64;
    0.5 * dot(w, w) + c * hinge
}

/// Linear-interpolation percentile (`p` in [0, 1]); sorts `values` in place.
pub(crate) fn percentile(values: &mut [f64], p: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let pos = p * (values.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    values[lo] + (values[hi] - values[lo]) * (pos - lo as f64)
}
