use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, softmax_cross_entropy, CnnModel, ModelError, Standardizer, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Optimizer {
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
    Sgd,
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::Adam { beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub seed: u64,
    /// Fraction of the training rows held out for per-epoch validation when
    /// no explicit validation set is supplied.
    pub validation_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 150,
            batch_size: 16,
            learning_rate: 1e-3,
            optimizer: Optimizer::default(),
            seed: 0,
            validation_fraction: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.epochs == 0 {
            return Err(ModelError::InvalidConfig("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(ModelError::InvalidConfig("batch size must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(ModelError::InvalidConfig("learning rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(ModelError::InvalidConfig("validation fraction must be in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_loss: Option<f64>,
    pub val_accuracy: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochStats>,
}

impl TrainHistory {
    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    pub fn final_train_loss(&self) -> Option<f64> {
        self.epochs.last().map(|e| e.train_loss)
    }
}

/// Optimizer state plus reusable buffers for mini-batch steps.
#[derive(Debug, Clone)]
pub struct Trainer {
    optimizer: Optimizer,
    learning_rate: f64,
    step: u64,
    first_moment: Vec<Vec<f64>>,
    second_moment: Vec<Vec<f64>>,
    grads: Vec<Vec<f64>>,
    trace: Trace,
    scratch: Vec<f64>,
    rng: ChaCha8Rng,
}

impl Trainer {
    pub fn new(model: &CnnModel, optimizer: Optimizer, learning_rate: f64, seed: u64) -> Self {
        let zeros: Vec<Vec<f64>> = model.param_tensors().iter().map(|t| vec![0.0; t.len()]).collect();
        Self {
            optimizer,
            learning_rate,
            step: 0,
            first_moment: zeros.clone(),
            second_moment: zeros.clone(),
            grads: zeros,
            trace: Trace::default(),
            scratch: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// One optimizer step on the mean cross-entropy of a batch of
    /// standardized rows. Returns the summed loss and the number of correct
    /// predictions made during the pass.
    pub fn step(
        &mut self,
        model: &mut CnnModel,
        rows: &[&[f64]],
        labels: &[usize],
        dropout: bool,
    ) -> Result<(f64, usize), ModelError> {
        self.grads.iter_mut().for_each(|g| g.fill(0.0));
        let mut total = 0.0;
        let mut correct = 0;
        for (x, &y) in rows.iter().zip(labels) {
            model.forward_trace(x, &mut self.trace, dropout.then_some(&mut self.rng));
            let logits = self.trace.acts.last().expect("non-empty trace");
            if argmax(logits) == y {
                correct += 1;
            }
            let (loss, dlogits) = softmax_cross_entropy(logits, y);
            total += loss;
            model.backward(&self.trace, &dlogits, &mut self.grads, &mut self.scratch);
        }
        if !total.is_finite() {
            return Err(ModelError::NonFiniteLoss { epoch: 0, batch: 0, loss: total });
        }
        let scale = 1.0 / rows.len() as f64;
        self.step += 1;
        let lr = self.learning_rate;
        let t = self.step as i32;
        let mut params = model.param_tensors_mut();
        for (i, p) in params.iter_mut().enumerate() {
            let g = &self.grads[i];
            match self.optimizer {
                Optimizer::Sgd => {
                    for (w, gv) in p.iter_mut().zip(g) {
                        *w -= lr * gv * scale;
                    }
                }
                Optimizer::Adam { beta1, beta2, epsilon } => {
                    let m = &mut self.first_moment[i];
                    let v = &mut self.second_moment[i];
                    let c1 = 1.0 - libm::pow(beta1, f64::from(t));
                    let c2 = 1.0 - libm::pow(beta2, f64::from(t));
                    for k in 0..p.len() {
                        let gk = g[k] * scale;
                        m[k] = beta1 * m[k] + (1.0 - beta1) * gk;
                        v[k] = beta2 * v[k] + (1.0 - beta2) * gk * gk;
                        let m_hat = m[k] / c1;
                        let v_hat = v[k] / c2;
                        p[k] -= lr * m_hat / (libm::sqrt(v_hat) + epsilon);
                    }
                }
            }
        }
        Ok((total, correct))
    }
}

fn check_data(model: &CnnModel, x: &[Vec<f64>], y: &[usize]) -> Result<(), ModelError> {
    if x.len() != y.len() {
        return Err(ModelError::ShapeMismatch(format!("{} rows but {} labels", x.len(), y.len())));
    }
    if let Some(row) = x.iter().find(|r| r.len() != model.input_dim) {
        return Err(ModelError::ShapeMismatch(format!(
            "row of length {} for input dimension {}",
            row.len(),
            model.input_dim
        )));
    }
    if let Some(&bad) = y.iter().find(|&&l| l >= model.n_classes) {
        return Err(ModelError::ShapeMismatch(format!("label {bad} outside {} classes", model.n_classes)));
    }
    Ok(())
}

/// Mean loss and accuracy of standardized rows in eval mode.
fn evaluate(model: &CnnModel, rows: &[Vec<f64>], y: &[usize]) -> (f64, f64) {
    let mut trace = Trace::default();
    let mut loss = 0.0;
    let mut correct = 0;
    for (x, &label) in rows.iter().zip(y) {
        model.forward_trace(x, &mut trace, None);
        let logits = trace.acts.last().expect("non-empty trace");
        loss += softmax_cross_entropy(logits, label).0;
        if argmax(logits) == label {
            correct += 1;
        }
    }
    let n = rows.len().max(1) as f64;
    (loss / n, correct as f64 / n)
}

/// Train on `(x, y)` holding out `cfg.validation_fraction` for per-epoch
/// validation.
pub fn fit(model: CnnModel, x: &[Vec<f64>], y: &[usize], cfg: &TrainConfig) -> Result<(CnnModel, TrainHistory), ModelError> {
    cfg.validate()?;
    check_data(&model, x, y)?;
    if cfg.validation_fraction > 0.0 && x.len() > 1 {
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x7a11_da7e));
        let n_val = ((x.len() as f64 * cfg.validation_fraction) as usize).clamp(1, x.len() - 1);
        let (val_idx, train_idx) = order.split_at(n_val);
        let pick = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<usize>) {
            (idx.iter().map(|&i| x[i].clone()).collect(), idx.iter().map(|&i| y[i]).collect())
        };
        let (tx, ty) = pick(train_idx);
        let (vx, vy) = pick(val_idx);
        fit_with_validation(model, &tx, &ty, Some((&vx, &vy)), cfg)
    } else {
        fit_with_validation(model, x, y, None, cfg)
    }
}

/// Mini-batch training with per-epoch shuffling. Features are standardized
/// with training-set statistics, which are stored in the returned model.
pub fn fit_with_validation(
    mut model: CnnModel,
    x: &[Vec<f64>],
    y: &[usize],
    validation: Option<(&[Vec<f64>], &[usize])>,
    cfg: &TrainConfig,
) -> Result<(CnnModel, TrainHistory), ModelError> {
    cfg.validate()?;
    check_data(&model, x, y)?;
    let mut seen = vec![false; model.n_classes];
    y.iter().for_each(|&l| seen[l] = true);
    if seen.iter().filter(|&&s| s).count() < 2 {
        return Err(ModelError::DegenerateData("training labels contain fewer than two classes".into()));
    }
    if let Some((vx, vy)) = validation {
        check_data(&model, vx, vy)?;
    }

    model.standardizer = Standardizer::fit(x);
    let rows: Vec<Vec<f64>> = x.iter().map(|r| model.standardizer.apply(r)).collect();
    let val_rows: Option<(Vec<Vec<f64>>, &[usize])> =
        validation.map(|(vx, vy)| (vx.iter().map(|r| model.standardizer.apply(r)).collect(), vy));

    let mut trainer = Trainer::new(&model, cfg.optimizer, cfg.learning_rate, cfg.seed);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut history = TrainHistory::default();
    for epoch in 0..cfg.epochs {
        order.shuffle(trainer.rng_mut());
        let mut loss_sum = 0.0;
        let mut correct = 0;
        for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let batch: Vec<&[f64]> = chunk.iter().map(|&i| rows[i].as_slice()).collect();
            let labels: Vec<usize> = chunk.iter().map(|&i| y[i]).collect();
            let (loss, ok) = trainer.step(&mut model, &batch, &labels, true).map_err(|e| match e {
                ModelError::NonFiniteLoss { loss, .. } => ModelError::NonFiniteLoss { epoch, batch: b, loss },
                other => other,
            })?;
            loss_sum += loss;
            correct += ok;
        }
        if !model.all_finite() {
            return Err(ModelError::NonFiniteLoss { epoch, batch: 0, loss: f64::NAN });
        }
        let n = rows.len() as f64;
        let (val_loss, val_accuracy) = match &val_rows {
            Some((vx, vy)) if !vx.is_empty() => {
                let (l, a) = evaluate(&model, vx, vy);
                (Some(l), Some(a))
            }
            _ => (None, None),
        };
        history.epochs.push(EpochStats { train_loss: loss_sum / n, train_accuracy: correct as f64 / n, val_loss, val_accuracy });
    }
    Ok((model, history))
}
