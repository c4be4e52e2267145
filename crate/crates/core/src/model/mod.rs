//! A compact 1-D convolutional classifier over aggregated feature vectors.
//!
//! The default topology ([`default_architecture`]) treats the feature vector
//! as a one-channel signal:
//!
//! ```text
//! Conv1D(64, k=5) → ReLU → Conv1D(64, k=5) → ReLU → Dropout(0.1) → MaxPool(4)
//!   → Conv1D(128, k=5) → ReLU → Dropout(0.1) → MaxPool(2) → Flatten → Dense(n_classes) → Softmax
//! ```
//!
//! Convolutions use "same" padding and pooling keeps a trailing partial
//! window, so any input length of at least one chains through the stack.

mod gradcheck;
mod layers;
mod train;

pub use gradcheck::{gradient_check, gradient_check_params, GradCheckReport, ParamRef};
pub use layers::{Conv1d, Dense, MaxPool};
pub use train::{fit, fit_with_validation, EpochStats, Optimizer, TrainConfig, TrainHistory, Trainer};

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsp::Matrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("degenerate training data: {0}")]
    DegenerateData(String),
    #[error("loss became non-finite at epoch {epoch}, batch {batch} (loss = {loss})")]
    NonFiniteLoss { epoch: usize, batch: usize, loss: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Topology description, independent of input size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LayerSpec {
    Conv1d { out_channels: usize, kernel: usize, stride: usize },
    Relu,
    Dropout { rate: f64 },
    MaxPool { width: usize },
    Flatten,
    Dense { out_dim: usize },
}

pub fn default_architecture(n_classes: usize) -> Vec<LayerSpec> {
    use LayerSpec::*;
    vec![
        Conv1d { out_channels: 64, kernel: 5, stride: 1 },
        Relu,
        Conv1d { out_channels: 64, kernel: 5, stride: 1 },
        Relu,
        Dropout { rate: 0.1 },
        MaxPool { width: 4 },
        Conv1d { out_channels: 128, kernel: 5, stride: 1 },
        Relu,
        Dropout { rate: 0.1 },
        MaxPool { width: 2 },
        Flatten,
        Dense { out_dim: n_classes },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Layer {
    Conv1d(Conv1d),
    Relu,
    Dropout { rate: f64 },
    MaxPool(MaxPool),
    Flatten,
    Dense(Dense),
}

impl Layer {
    pub fn spec(&self) -> LayerSpec {
        match self {
            Layer::Conv1d(c) => LayerSpec::Conv1d { out_channels: c.out_channels, kernel: c.kernel, stride: c.stride },
            Layer::Relu => LayerSpec::Relu,
            Layer::Dropout { rate } => LayerSpec::Dropout { rate: *rate },
            Layer::MaxPool(p) => LayerSpec::MaxPool { width: p.width },
            Layer::Flatten => LayerSpec::Flatten,
            Layer::Dense(d) => LayerSpec::Dense { out_dim: d.out_dim },
        }
    }

    fn params(&self) -> Vec<&[f64]> {
        match self {
            Layer::Conv1d(c) => vec![&c.weights[..], &c.bias[..]],
            Layer::Dense(d) => vec![&d.weights[..], &d.bias[..]],
            _ => Vec::new(),
        }
    }

    fn params_mut(&mut self) -> Vec<&mut [f64]> {
        match self {
            Layer::Conv1d(c) => vec![&mut c.weights[..], &mut c.bias[..]],
            Layer::Dense(d) => vec![&mut d.weights[..], &mut d.bias[..]],
            _ => Vec::new(),
        }
    }
}

/// Per-dimension affine standardization, `(v - mean) / std`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn identity(dim: usize) -> Self {
        Self { mean: vec![0.0; dim], std: vec![1.0; dim] }
    }

    /// Population mean and standard deviation per column. Constant columns
    /// get a unit scale.
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let dim = x.first().map_or(0, Vec::len);
        let n = x.len() as f64;
        let mut mean = vec![0.0; dim];
        for row in x {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for row in x {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = libm::sqrt(s / n);
                if sd > 1e-12 && sd.is_finite() {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, std }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        v.iter().zip(&self.mean).zip(&self.std).map(|((x, m), s)| (x - m) / s).collect()
    }
}

/// Intermediate values of one forward pass, kept for backpropagation.
#[derive(Debug, Clone, Default)]
pub(crate) struct Trace {
    /// `acts[0]` is the input, `acts[i + 1]` the output of layer `i`.
    pub acts: Vec<Vec<f64>>,
    /// Dropout scale factors (empty when inactive).
    pub masks: Vec<Vec<f64>>,
    pub argmax: Vec<Vec<u32>>,
    pub scratch: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CnnModel {
    pub input_dim: usize,
    pub n_classes: usize,
    pub rng_seed: u64,
    pub layers: Vec<Layer>,
    pub standardizer: Standardizer,
}

/// Build the default architecture with He-uniform weights and zero biases.
pub fn init_model(input_dim: usize, n_classes: usize, seed: u64) -> Result<CnnModel, ModelError> {
    CnnModel::from_specs(input_dim, n_classes, &default_architecture(n_classes), seed)
}

impl CnnModel {
    pub fn from_specs(input_dim: usize, n_classes: usize, specs: &[LayerSpec], seed: u64) -> Result<Self, ModelError> {
        if input_dim == 0 {
            return Err(ModelError::InvalidConfig("input dimension must be positive".into()));
        }
        if n_classes < 2 {
            return Err(ModelError::InvalidConfig("need at least two classes".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut channels, mut len) = (1usize, input_dim);
        let mut flat: Option<usize> = None;
        let mut layers = Vec::with_capacity(specs.len());
        for spec in specs {
            let layer = match *spec {
                LayerSpec::Conv1d { out_channels, kernel, stride } => {
                    if flat.is_some() || out_channels == 0 || kernel == 0 || stride == 0 {
                        return Err(ModelError::InvalidConfig("bad convolution layer".into()));
                    }
                    let mut conv = Conv1d::new(channels, out_channels, kernel, stride, len);
                    let fan_in = conv.fan_in();
                    he_uniform(&mut conv.weights, fan_in, &mut rng);
                    channels = out_channels;
                    len = conv.out_len;
                    Layer::Conv1d(conv)
                }
                LayerSpec::Relu => Layer::Relu,
                LayerSpec::Dropout { rate } => {
                    if !(0.0..1.0).contains(&rate) {
                        return Err(ModelError::InvalidConfig("dropout rate must be in [0, 1)".into()));
                    }
                    Layer::Dropout { rate }
                }
                LayerSpec::MaxPool { width } => {
                    if flat.is_some() || width == 0 {
                        return Err(ModelError::InvalidConfig("bad pooling layer".into()));
                    }
                    let pool = MaxPool::new(width, channels, len);
                    len = pool.out_len;
                    Layer::MaxPool(pool)
                }
                LayerSpec::Flatten => {
                    flat = Some(channels * len);
                    Layer::Flatten
                }
                LayerSpec::Dense { out_dim } => {
                    let in_dim = flat.unwrap_or(channels * len);
                    let mut dense = Dense::new(in_dim, out_dim);
                    he_uniform(&mut dense.weights, in_dim, &mut rng);
                    flat = Some(out_dim);
                    channels = 1;
                    len = out_dim;
                    Layer::Dense(dense)
                }
            };
            layers.push(layer);
        }
        if channels * len != n_classes {
            return Err(ModelError::InvalidConfig(alloc::format!(
                "architecture produces {} outputs for {n_classes} classes",
                channels * len
            )));
        }
        Ok(Self { input_dim, n_classes, rng_seed: seed, layers, standardizer: Standardizer::identity(input_dim) })
    }

    pub fn architecture(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(Layer::spec).collect()
    }

    pub fn param_tensors(&self) -> Vec<&[f64]> {
        self.layers.iter().flat_map(Layer::params).collect()
    }

    pub fn param_tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers.iter_mut().flat_map(Layer::params_mut).collect()
    }

    pub fn param_count(&self) -> usize {
        self.param_tensors().iter().map(|t| t.len()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.param_tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    fn check_input(&self, x: &[f64]) -> Result<(), ModelError> {
        if x.len() != self.input_dim {
            return Err(ModelError::ShapeMismatch(alloc::format!(
                "expected {} inputs, got {}",
                self.input_dim,
                x.len()
            )));
        }
        Ok(())
    }

    /// Forward one (already standardized) sample, returning logits.
    pub(crate) fn forward_trace(&self, x: &[f64], trace: &mut Trace, dropout: Option<&mut ChaCha8Rng>) {
        let n = self.layers.len();
        trace.acts.resize_with(n + 1, Vec::new);
        trace.masks.resize_with(n, Vec::new);
        trace.argmax.resize_with(n, Vec::new);
        trace.acts[0].clear();
        trace.acts[0].extend_from_slice(x);
        let mut rng = dropout;
        for (i, layer) in self.layers.iter().enumerate() {
            let (head, tail) = trace.acts.split_at_mut(i + 1);
            let input = &head[i];
            let out = &mut tail[0];
            trace.masks[i].clear();
            match layer {
                Layer::Conv1d(c) => {
                    out.resize(c.out_channels * c.out_len, 0.0);
                    c.forward(input, out, &mut trace.scratch);
                }
                Layer::Relu => {
                    out.clear();
                    out.extend(input.iter().map(|&v| v.max(0.0)));
                }
                Layer::Dropout { rate } => {
                    out.clear();
                    out.extend_from_slice(input);
                    if let Some(r) = rng.as_deref_mut() {
                        let keep = 1.0 - rate;
                        let mask = &mut trace.masks[i];
                        mask.extend(input.iter().map(|_| if r.random::<f64>() < keep { 1.0 / keep } else { 0.0 }));
                        out.iter_mut().zip(mask.iter()).for_each(|(o, m)| *o *= m);
                    }
                }
                Layer::MaxPool(p) => {
                    out.resize(p.channels * p.out_len, 0.0);
                    trace.argmax[i].resize(p.channels * p.out_len, 0);
                    p.forward(input, out, &mut trace.argmax[i]);
                }
                Layer::Flatten => {
                    out.clear();
                    out.extend_from_slice(input);
                }
                Layer::Dense(d) => {
                    out.resize(d.out_dim, 0.0);
                    d.forward(input, out);
                }
            }
        }
    }

    /// Backpropagate `dlogits` through a trace, adding parameter gradients
    /// into `grads` (one buffer per tensor, in [`CnnModel::param_tensors`] order).
    pub(crate) fn backward(&self, trace: &Trace, dlogits: &[f64], grads: &mut [Vec<f64>], scratch: &mut Vec<f64>) {
        let mut delta: Vec<f64> = dlogits.to_vec();
        let mut next: Vec<f64> = Vec::new();
        let mut g = grads.len();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let input = &trace.acts[i];
            let need_dx = i > 0;
            match layer {
                Layer::Conv1d(c) => {
                    g -= 2;
                    let (gw, gb) = grads[g..g + 2].split_at_mut(1);
                    next.resize(input.len(), 0.0);
                    c.backward(input, &delta, &mut gw[0], &mut gb[0], need_dx.then_some(&mut next[..]), scratch);
                    core::mem::swap(&mut delta, &mut next);
                }
                Layer::Dense(d) => {
                    g -= 2;
                    let (gw, gb) = grads[g..g + 2].split_at_mut(1);
                    next.resize(input.len(), 0.0);
                    d.backward(input, &delta, &mut gw[0], &mut gb[0], need_dx.then_some(&mut next[..]));
                    core::mem::swap(&mut delta, &mut next);
                }
                Layer::Relu => {
                    for (d, x) in delta.iter_mut().zip(input) {
                        if *x <= 0.0 {
                            *d = 0.0;
                        }
                    }
                }
                Layer::Dropout { .. } => {
                    let mask = &trace.masks[i];
                    if !mask.is_empty() {
                        delta.iter_mut().zip(mask).for_each(|(d, m)| *d *= m);
                    }
                }
                Layer::MaxPool(p) => {
                    next.resize(input.len(), 0.0);
                    p.backward(&delta, &trace.argmax[i], &mut next);
                    core::mem::swap(&mut delta, &mut next);
                }
                Layer::Flatten => {}
            }
        }
    }

    /// Softmax probabilities for a batch of standardized rows. Dropout is
    /// applied only in `train_mode`, drawing masks from a generator seeded
    /// with the model seed.
    pub fn forward(&self, batch: &Matrix, train_mode: bool) -> Result<Matrix, ModelError> {
        if batch.cols() != self.input_dim {
            return Err(ModelError::ShapeMismatch(alloc::format!(
                "batch has {} columns, model expects {}",
                batch.cols(),
                self.input_dim
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed ^ 0x5eed_d50f);
        let mut trace = Trace::default();
        let mut out = Matrix::zeros(batch.rows(), self.n_classes);
        for r in 0..batch.rows() {
            self.forward_trace(batch.row(r), &mut trace, train_mode.then_some(&mut rng));
            let p = softmax(trace.acts.last().expect("non-empty trace"));
            out.row_mut(r).copy_from_slice(&p);
        }
        Ok(out)
    }

    /// Class distribution for a raw (unstandardized) feature vector.
    pub fn predict(&self, v: &[f64]) -> Result<Vec<f64>, ModelError> {
        self.check_input(v)?;
        let mut trace = Trace::default();
        self.forward_trace(&self.standardizer.apply(v), &mut trace, None);
        Ok(softmax(trace.acts.last().expect("non-empty trace")))
    }

    pub fn predict_class(&self, v: &[f64]) -> Result<usize, ModelError> {
        Ok(argmax(&self.predict(v)?))
    }

    /// Cross-entropy loss and its parameter gradients for one standardized
    /// sample, dropout disabled.
    pub fn loss_and_gradients(&self, x: &[f64], label: usize) -> Result<(f64, Vec<Vec<f64>>), ModelError> {
        self.check_input(x)?;
        if label >= self.n_classes {
            return Err(ModelError::ShapeMismatch(alloc::format!("label {label} out of range")));
        }
        let mut trace = Trace::default();
        self.forward_trace(x, &mut trace, None);
        let (loss, dlogits) = softmax_cross_entropy(trace.acts.last().expect("non-empty trace"), label);
        let mut grads: Vec<Vec<f64>> = self.param_tensors().iter().map(|t| vec![0.0; t.len()]).collect();
        self.backward(&trace, &dlogits, &mut grads, &mut Vec::new());
        Ok((loss, grads))
    }

    /// Cross-entropy of one standardized sample, dropout disabled.
    pub fn loss(&self, x: &[f64], label: usize) -> Result<f64, ModelError> {
        self.check_input(x)?;
        let mut trace = Trace::default();
        self.forward_trace(x, &mut trace, None);
        Ok(softmax_cross_entropy(trace.acts.last().expect("non-empty trace"), label).0)
    }
}

fn he_uniform(w: &mut [f64], fan_in: usize, rng: &mut ChaCha8Rng) {
    let limit = libm::sqrt(6.0 / fan_in as f64);
    for v in w {
        *v = rng.random_range(-limit..limit);
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| libm::exp(z - max)).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Loss `-ln p[label]` and its gradient with respect to the logits,
/// `p - one_hot(label)`.
pub fn softmax_cross_entropy(logits: &[f64], label: usize) -> (f64, Vec<f64>) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_sum = libm::log(logits.iter().map(|&z| libm::exp(z - max)).sum::<f64>()) + max;
    let mut grad = softmax(logits);
    grad[label] -= 1.0;
    (log_sum - logits[label], grad)
}

pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}
