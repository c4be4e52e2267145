use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{softmax_cross_entropy, CnnModel, Layer, ModelError, Trace};

/// Position of one scalar parameter: tensor index in
/// [`CnnModel::param_tensors`] order, then offset within the tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamRef {
    pub tensor: usize,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub checked: usize,
    /// Parameters whose ±epsilon perturbation flipped a ReLU or moved a
    /// pooling argmax; the loss is not differentiable across that step.
    pub skipped_kinks: usize,
}

/// Which ReLUs are active and where each pooling window took its maximum.
fn activation_pattern(model: &CnnModel, trace: &Trace) -> Vec<u32> {
    let mut pattern = Vec::new();
    for (i, layer) in model.layers.iter().enumerate() {
        match layer {
            Layer::Relu => pattern.extend(trace.acts[i].iter().map(|&v| u32::from(v > 0.0))),
            Layer::MaxPool(_) => pattern.extend_from_slice(&trace.argmax[i]),
            _ => {}
        }
    }
    pattern
}

fn loss_and_pattern(model: &CnnModel, x: &[f64], label: usize, trace: &mut Trace) -> (f64, Vec<u32>) {
    model.forward_trace(x, trace, None);
    let loss = softmax_cross_entropy(trace.acts.last().expect("non-empty trace"), label).0;
    (loss, activation_pattern(model, trace))
}

/// Compare analytic gradients against central differences on a seeded
/// random subset of about 1% of each parameter tensor (at least one entry
/// per tensor). Dropout is disabled.
pub fn gradient_check(model: &CnnModel, x: &[f64], label: usize, epsilon: f64) -> Result<GradCheckReport, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(model.rng_seed ^ 0x9c4e_c4ec);
    let mut refs = Vec::new();
    for (tensor, t) in model.param_tensors().iter().enumerate() {
        let amount = t.len().div_ceil(100).max(1);
        for index in sample(&mut rng, t.len(), amount).into_vec() {
            refs.push(ParamRef { tensor, index });
        }
    }
    refs.sort_by_key(|r| (r.tensor, r.index));
    gradient_check_params(model, x, label, epsilon, &refs)
}

/// Gradient check restricted to the given parameters.
pub fn gradient_check_params(
    model: &CnnModel,
    x: &[f64],
    label: usize,
    epsilon: f64,
    params: &[ParamRef],
) -> Result<GradCheckReport, ModelError> {
    let (_, analytic) = model.loss_and_gradients(x, label)?;
    let mut probe = model.clone();
    let mut trace = Trace::default();
    let (_, base_pattern) = loss_and_pattern(model, x, label, &mut trace);

    let mut report = GradCheckReport { max_rel_error: 0.0, checked: 0, skipped_kinks: 0 };
    for r in params {
        let original = probe.param_tensors()[r.tensor][r.index];
        probe.param_tensors_mut()[r.tensor][r.index] = original + epsilon;
        let (plus, plus_pattern) = loss_and_pattern(&probe, x, label, &mut trace);
        probe.param_tensors_mut()[r.tensor][r.index] = original - epsilon;
        let (minus, minus_pattern) = loss_and_pattern(&probe, x, label, &mut trace);
        probe.param_tensors_mut()[r.tensor][r.index] = original;

        if plus_pattern != base_pattern || minus_pattern != base_pattern {
            report.skipped_kinks += 1;
            continue;
        }
        let numeric = (plus - minus) / (2.0 * epsilon);
        let a = analytic[r.tensor][r.index];
        let denom = a.abs().max(numeric.abs()).max(1e-7);
        report.max_rel_error = report.max_rel_error.max((a - numeric).abs() / denom);
        report.checked += 1;
    }
    Ok(report)
}
