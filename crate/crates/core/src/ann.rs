//! Classical baseline: a `d -> 10 (sigmoid) -> 3 (tanh) -> 1 (linear)` MLP
//! trained full-batch with ADAM on the normalised MSE.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::optimize::{adam_minimize_fused, AdamConfig, OptResult};
use crate::rng::SeededRng;
use crate::scaler::{FeatureScaler, TargetScaler};
use crate::{Error, Result};

pub const HIDDEN1: usize = 10;
pub const HIDDEN2: usize = 3;

/// Trainable parameter count for `d` inputs.
pub fn mlp_param_count(d: usize) -> usize {
    HIDDEN1 * d + HIDDEN1 + HIDDEN2 * HIDDEN1 + HIDDEN2 + HIDDEN2 + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for AnnConfig {
    fn default() -> Self {
        Self {
            epochs: 5000,
            learning_rate: 0.01,
            seed: 0,
        }
    }
}

/// Offsets into the flat parameter vector:
/// `W1 (10 x d), b1, W2 (3 x 10), b2, W3 (1 x 3), b3`, matrices row-major.
#[derive(Debug, Clone, Copy)]
struct Layout {
    d: usize,
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
    w3: usize,
    b3: usize,
}

impl Layout {
    fn new(d: usize) -> Self {
        let w1 = 0;
        let b1 = w1 + HIDDEN1 * d;
        let w2 = b1 + HIDDEN1;
        let b2 = w2 + HIDDEN2 * HIDDEN1;
        let w3 = b2 + HIDDEN2;
        let b3 = w3 + HIDDEN2;
        Self {
            d,
            w1,
            b1,
            w2,
            b2,
            w3,
            b3,
        }
    }
}

struct Activations {
    h1: [f64; HIDDEN1],
    h2: [f64; HIDDEN2],
    out: f64,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-z))
}

fn forward(l: &Layout, p: &[f64], u: &[f64]) -> Activations {
    let mut h1 = [0.0; HIDDEN1];
    for (i, h) in h1.iter_mut().enumerate() {
        let row = &p[l.w1 + i * l.d..l.w1 + (i + 1) * l.d];
        let z = p[l.b1 + i] + row.iter().zip(u).map(|(w, x)| w * x).sum::<f64>();
        *h = sigmoid(z);
    }
    let mut h2 = [0.0; HIDDEN2];
    for (i, h) in h2.iter_mut().enumerate() {
        let row = &p[l.w2 + i * HIDDEN1..l.w2 + (i + 1) * HIDDEN1];
        let z = p[l.b2 + i] + row.iter().zip(&h1).map(|(w, x)| w * x).sum::<f64>();
        *h = libm::tanh(z);
    }
    let out = p[l.b3] + p[l.w3..l.w3 + HIDDEN2].iter().zip(&h2).map(|(w, x)| w * x).sum::<f64>();
    Activations { h1, h2, out }
}

/// Normalised-space MSE over `(u, t)` rows and its gradient, accumulated into `grad`.
fn loss_and_grad(l: &Layout, p: &[f64], rows: &[Vec<f64>], targets: &[f64], grad: &mut [f64]) -> f64 {
    grad.iter_mut().for_each(|g| *g = 0.0);
    let scale = 1.0 / rows.len() as f64;
    let mut loss = 0.0;
    for (u, &t) in rows.iter().zip(targets) {
        let a = forward(l, p, u);
        let r = a.out - t;
        loss += r * r;
        let d_out = 2.0 * r * scale;

        grad[l.b3] += d_out;
        let mut dz2 = [0.0; HIDDEN2];
        for i in 0..HIDDEN2 {
            grad[l.w3 + i] += d_out * a.h2[i];
            dz2[i] = d_out * p[l.w3 + i] * (1.0 - a.h2[i] * a.h2[i]);
        }
        let mut dh1 = [0.0; HIDDEN1];
        for i in 0..HIDDEN2 {
            grad[l.b2 + i] += dz2[i];
            for j in 0..HIDDEN1 {
                grad[l.w2 + i * HIDDEN1 + j] += dz2[i] * a.h1[j];
                dh1[j] += p[l.w2 + i * HIDDEN1 + j] * dz2[i];
            }
        }
        for j in 0..HIDDEN1 {
            let dz1 = dh1[j] * a.h1[j] * (1.0 - a.h1[j]);
            grad[l.b1 + j] += dz1;
            for (k, x) in u.iter().enumerate() {
                grad[l.w1 + j * l.d + k] += dz1 * x;
            }
        }
    }
    loss * scale
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    n_inputs: usize,
    params: Vec<f64>,
    input_scaler: FeatureScaler,
    output_scaler: TargetScaler,
}

impl MlpModel {
    pub fn from_parts(params: Vec<f64>, input_scaler: FeatureScaler, output_scaler: TargetScaler) -> Result<Self> {
        let d = input_scaler.dim();
        if d == 0 {
            return Err(Error::Argument("MLP needs at least one input".into()));
        }
        if params.len() != mlp_param_count(d) {
            return Err(Error::dimension("mlp params", mlp_param_count(d), params.len()));
        }
        if params.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("MLP parameters must be finite".into()));
        }
        Ok(Self {
            n_inputs: d,
            params,
            input_scaler,
            output_scaler,
        })
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn input_scaler(&self) -> &FeatureScaler {
        &self.input_scaler
    }

    pub fn output_scaler(&self) -> &TargetScaler {
        &self.output_scaler
    }

    /// Network output before decoding, for already-normalised inputs.
    pub fn raw_output(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.n_inputs {
            return Err(Error::dimension("input features", self.n_inputs, u.len()));
        }
        Ok(forward(&Layout::new(self.n_inputs), &self.params, u).out)
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let u = self.input_scaler.encode(x)?;
        Ok(self.output_scaler.decode(self.raw_output(&u)?))
    }

    pub fn predict_many(&self, inputs: &[Vec<f64>]) -> Result<Vec<f64>> {
        inputs.iter().map(|x| self.predict(x)).collect()
    }

    /// Normalised-space MSE and its gradient with respect to the parameters.
    pub fn loss_and_grad(&self, inputs: &[Vec<f64>], targets: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (rows, t) = self.encode_rows(inputs, targets)?;
        let mut grad = vec![0.0; self.params.len()];
        let loss = loss_and_grad(&Layout::new(self.n_inputs), &self.params, &rows, &t, &mut grad);
        Ok((loss, grad))
    }

    fn encode_rows(&self, inputs: &[Vec<f64>], targets: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        if inputs.is_empty() {
            return Err(Error::Argument("empty dataset".into()));
        }
        if inputs.len() != targets.len() {
            return Err(Error::dimension("targets", inputs.len(), targets.len()));
        }
        let rows = inputs
            .iter()
            .map(|x| self.input_scaler.encode(x))
            .collect::<Result<Vec<_>>>()?;
        Ok((rows, targets.iter().map(|&y| self.output_scaler.encode(y)).collect()))
    }
}

/// Shorthand for [`MlpModel::predict`].
pub fn mlp_forward(model: &MlpModel, x: &[f64]) -> Result<f64> {
    model.predict(x)
}

/// Weights and biases uniform on `+-1/sqrt(fan_in)`.
fn init_params(d: usize, seed: u64) -> Vec<f64> {
    let l = Layout::new(d);
    let mut rng = SeededRng::new(seed);
    let mut p = vec![0.0; mlp_param_count(d)];
    // each layer's bias block directly follows its weight block
    for (start, fan_in, fan_out) in [(l.w1, d, HIDDEN1), (l.w2, HIDDEN1, HIDDEN2), (l.w3, HIDDEN2, 1)] {
        let limit = 1.0 / libm::sqrt(fan_in as f64);
        for w in &mut p[start..start + (fan_in + 1) * fan_out] {
            *w = rng.uniform_in(-limit, limit);
        }
    }
    p
}

pub fn mlp_fit(inputs: &[Vec<f64>], targets: &[f64], cfg: &AnnConfig) -> Result<(MlpModel, OptResult)> {
    if inputs.is_empty() {
        return Err(Error::Argument("empty dataset".into()));
    }
    if cfg.epochs == 0 || !(cfg.learning_rate > 0.0) {
        return Err(Error::Argument(
            "ANN training needs epochs >= 1 and a positive learning rate".into(),
        ));
    }
    let input_scaler = FeatureScaler::fit(inputs)?;
    let output_scaler = TargetScaler::fit(targets)?;
    let mut model = MlpModel::from_parts(init_params(input_scaler.dim(), cfg.seed), input_scaler, output_scaler)?;
    let (rows, t) = model.encode_rows(inputs, targets)?;
    let layout = Layout::new(model.n_inputs);
    let adam = AdamConfig {
        learning_rate: cfg.learning_rate,
        n_steps: cfg.epochs,
        ..AdamConfig::default()
    };
    let result = adam_minimize_fused(|p, g| loss_and_grad(&layout, p, &rows, &t, g), &model.params, &adam)?;
    model.params.copy_from_slice(&result.best_point);
    Ok((model, result))
}
