//! Per-class precision, recall and F1 with confusion matrices.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::ExperimentError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Metrics of one evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub per_class: Vec<ClassMetrics>,
    /// Unweighted mean F1 over classes with nonzero support.
    pub macro_f1: f64,
    pub accuracy: f64,
    /// `confusion[truth][predicted]`.
    pub confusion: Vec<Vec<usize>>,
}

impl Metrics {
    pub fn class(&self, label: &str) -> Option<&ClassMetrics> {
        self.per_class.iter().find(|c| c.label == label)
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Compare predicted and true class indices into `classes`.
pub fn compute_metrics(predictions: &[usize], truth: &[usize], classes: &[String]) -> Result<Metrics, ExperimentError> {
    if predictions.len() != truth.len() {
        return Err(ExperimentError::LengthMismatch { predictions: predictions.len(), truth: truth.len() });
    }
    let n = classes.len();
    if let Some(&bad) = predictions.iter().chain(truth).find(|&&l| l >= n) {
        return Err(ExperimentError::LabelOutOfRange { label: bad, classes: n });
    }
    let mut confusion = vec![vec![0usize; n]; n];
    for (&p, &t) in predictions.iter().zip(truth) {
        confusion[t][p] += 1;
    }
    let mut per_class = Vec::with_capacity(n);
    for (c, label) in classes.iter().enumerate() {
        let tp = confusion[c][c];
        let support: usize = confusion[c].iter().sum();
        let predicted: usize = confusion.iter().map(|row| row[c]).sum();
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, support);
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        per_class.push(ClassMetrics { label: label.clone(), precision, recall, f1, support });
    }
    let supported: Vec<f64> = per_class.iter().filter(|c| c.support > 0).map(|c| c.f1).collect();
    let macro_f1 = if supported.is_empty() { 0.0 } else { supported.iter().sum::<f64>() / supported.len() as f64 };
    let correct: usize = (0..n).map(|c| confusion[c][c]).sum();
    Ok(Metrics { per_class, macro_f1, accuracy: ratio(correct, truth.len()), confusion })
}

/// One held-out prediction, kept for audit and for regenerating reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub fold: usize,
    /// Identifier of the evaluated utterance (its path).
    pub id: String,
    pub truth: usize,
    pub predicted: usize,
}

/// Per-fold metrics and their means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub classes: Vec<String>,
    pub folds: Vec<Metrics>,
    /// Per-class precision, recall and F1 averaged over folds; support summed.
    pub mean: Vec<ClassMetrics>,
    /// Mean over folds of the per-fold macro-F1.
    pub mean_macro_f1: f64,
    pub mean_accuracy: f64,
    /// Sum of the per-fold confusion matrices.
    pub confusion: Vec<Vec<usize>>,
}

impl MetricsReport {
    pub fn from_folds(classes: Vec<String>, folds: Vec<Metrics>) -> Self {
        let n = classes.len();
        let k = folds.len().max(1) as f64;
        let mut confusion = vec![vec![0usize; n]; n];
        let mut mean: Vec<ClassMetrics> = classes
            .iter()
            .map(|l| ClassMetrics { label: l.clone(), precision: 0.0, recall: 0.0, f1: 0.0, support: 0 })
            .collect();
        for m in &folds {
            for (acc, c) in mean.iter_mut().zip(&m.per_class) {
                acc.precision += c.precision / k;
                acc.recall += c.recall / k;
                acc.f1 += c.f1 / k;
                acc.support += c.support;
            }
            for (row, frow) in confusion.iter_mut().zip(&m.confusion) {
                for (a, b) in row.iter_mut().zip(frow) {
                    *a += b;
                }
            }
        }
        let mean_macro_f1 = folds.iter().map(|m| m.macro_f1).sum::<f64>() / k;
        let mean_accuracy = folds.iter().map(|m| m.accuracy).sum::<f64>() / k;
        Self { classes, folds, mean, mean_macro_f1, mean_accuracy, confusion }
    }

    /// Rebuild a report from persisted predictions alone. Folds are ordered
    /// by fold index; within a fold, predictions keep their stored order.
    pub fn from_predictions(classes: Vec<String>, predictions: &[Prediction]) -> Result<Self, ExperimentError> {
        let mut by_fold: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
        for p in predictions {
            let e = by_fold.entry(p.fold).or_default();
            e.0.push(p.predicted);
            e.1.push(p.truth);
        }
        let folds = by_fold.values().map(|(p, t)| compute_metrics(p, t, &classes)).collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_folds(classes, folds))
    }

    pub fn class(&self, label: &str) -> Option<&ClassMetrics> {
        self.mean.iter().find(|c| c.label == label)
    }
}
