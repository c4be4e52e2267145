//! Label schemes, stratified folds, metrics and the evaluation protocols.
//!
//! Protocols work on [`Example`]s, utterances whose feature vectors were
//! already extracted. Reading audio and writing reports is left to the caller.

mod folds;
mod labels;
mod metrics;
mod protocol;

use alloc::string::String;
use thiserror::Error;

use crate::features::FeatureError;
use crate::model::ModelError;

pub use folds::{grouped_kfold, stratified_kfold, training_indices};
pub use labels::{
    compound_label, map_labels, parse_emodb, parse_emovo, parse_filename, parse_ravdess, parse_synthetic, synthetic_filename, Dataset,
    Emotion, Gender, LabelMode, LabelScheme, Language, SkipReason, Utterance,
};
pub use metrics::{compute_metrics, ClassMetrics, Metrics, MetricsReport, Prediction};
pub use protocol::{
    class_list, feature_combinations, run_cross_lingual, run_experiment, run_feature_search, run_gender, run_mono_lingual,
    run_multi_lingual, Example, ExperimentOutcome, ExperimentSpec, Executor, FoldSummary, GenderResult, GenderRow, MultiResult,
    Protocol, RunResult, SearchRow, Sequential,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
    #[error("manifest is empty")]
    EmptyManifest,
    #[error("label {label} is not part of the {dataset} label set ({path})")]
    UnmappedLabel { dataset: Dataset, label: String, path: String },
    #[error("class {class} has {count} members, fewer than the {k} folds")]
    ClassTooSmall { class: String, count: usize, k: usize },
    #[error("{predictions} predictions for {truth} true labels")]
    LengthMismatch { predictions: usize, truth: usize },
    #[error("label index {label} outside {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("no utterances for language {0}")]
    MissingLanguage(Language),
    #[error("missing features: {0}")]
    MissingFeatures(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
