//! Mono-, multi-, cross-lingual and gender protocols plus feature search.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use super::folds::{grouped_kfold, stratified_kfold, training_indices};
use super::labels::{compound_label, Emotion, Gender, LabelMode, Language, Utterance};
use super::metrics::{MetricsReport, Prediction};
use super::ExperimentError;
use crate::features::{validate_set, FeatureKind, FeatureVector};
use crate::model::{fit_with_validation, init_model, TrainConfig};
use crate::seed::derive_seed;

/// An utterance with its extracted features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub utterance: Utterance,
    pub features: FeatureVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Mono,
    Multi,
    Cross,
    Gender,
}

impl Protocol {
    pub fn id(self) -> &'static str {
        match self {
            Protocol::Mono => "mono",
            Protocol::Multi => "multi",
            Protocol::Cross => "cross",
            Protocol::Gender => "gender",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Protocol {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mono" => Ok(Protocol::Mono),
            "multi" => Ok(Protocol::Multi),
            "cross" => Ok(Protocol::Cross),
            "gender" => Ok(Protocol::Gender),
            _ => Err(ExperimentError::InvalidSpec(format!("unknown protocol `{s}` (expected mono, multi, cross or gender)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub protocol: Protocol,
    pub feature_set: Vec<FeatureKind>,
    pub train_languages: Vec<Language>,
    pub test_languages: Vec<Language>,
    pub label_mode: LabelMode,
    pub folds: usize,
    pub seed: u64,
    /// Keep each speaker inside a single fold instead of stratifying by class.
    pub speaker_independent: bool,
    /// Optimizer settings. Its `seed` and `validation_fraction` are replaced
    /// per fold.
    pub train: TrainConfig,
}

impl ExperimentSpec {
    /// Defaults for a protocol over the given languages: the combined
    /// MFCC, mel and contrast features, 5 folds, seed 0.
    pub fn new(protocol: Protocol, train_languages: Vec<Language>, test_languages: Vec<Language>) -> Self {
        Self {
            protocol,
            feature_set: FeatureKind::COMBINED.to_vec(),
            train_languages,
            test_languages,
            label_mode: if protocol == Protocol::Gender { LabelMode::GenderEmotion } else { LabelMode::Emotion },
            folds: 5,
            seed: 0,
            speaker_independent: false,
            train: TrainConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let err = |m: String| Err(ExperimentError::InvalidSpec(m));
        validate_set(&self.feature_set)?;
        self.train.validate()?;
        if self.folds < 2 {
            return err(format!("folds must be at least 2, got {}", self.folds));
        }
        let train: BTreeSet<Language> = self.train_languages.iter().copied().collect();
        let test: BTreeSet<Language> = self.test_languages.iter().copied().collect();
        if train.len() != self.train_languages.len() || test.len() != self.test_languages.len() {
            return err("language lists contain duplicates".into());
        }
        let expected_mode = if self.protocol == Protocol::Gender { LabelMode::GenderEmotion } else { LabelMode::Emotion };
        if self.label_mode != expected_mode {
            return err(format!("protocol {} requires label mode {expected_mode:?}", self.protocol));
        }
        match self.protocol {
            Protocol::Mono | Protocol::Gender => {
                if train.len() != 1 || train != test {
                    return err(format!("protocol {} needs one language used for both training and testing", self.protocol));
                }
            }
            Protocol::Multi => {
                if train.len() != 1 {
                    return err("multi-lingual runs train on exactly one language".into());
                }
                if test.is_empty() || !train.is_disjoint(&test) {
                    return err("multi-lingual test languages must be non-empty and exclude the training language".into());
                }
            }
            Protocol::Cross => {
                if train.len() < 2 || train != test {
                    return err("cross-lingual runs pool at least two languages, identical for training and testing".into());
                }
            }
        }
        Ok(())
    }

    pub fn cell_id(&self) -> String {
        let langs: Vec<&str> = self.train_languages.iter().map(|l| l.id()).collect();
        let feats: Vec<&str> = self.feature_set.iter().map(|k| k.id()).collect();
        format!("{}/{}/{}", self.protocol, langs.join("+"), feats.join("+"))
    }
}

/// Runs independent jobs, possibly in parallel. Results come back in job
/// order.
pub trait Executor {
    fn map<T, F>(&self, jobs: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, jobs: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..jobs).map(f).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSummary {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub seed: u64,
    pub final_train_loss: f64,
    pub final_val_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub cell_id: String,
    pub protocol: Protocol,
    pub train_languages: Vec<Language>,
    pub test_languages: Vec<Language>,
    pub feature_set: Vec<FeatureKind>,
    pub label_mode: LabelMode,
    pub classes: Vec<String>,
    pub predictions: Vec<Prediction>,
    pub report: MetricsReport,
    pub models_fitted: usize,
    pub folds: Vec<FoldSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiResult {
    pub train_language: Language,
    /// One result per test language, each evaluating the same model.
    pub results: Vec<RunResult>,
    pub models_fitted: usize,
}

/// F1 of one emotion without gender and for each gender's compound label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenderRow {
    pub emotion: Emotion,
    pub baseline_f1: Option<f64>,
    pub male_f1: Option<f64>,
    pub female_f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenderResult {
    pub language: Language,
    pub baseline: RunResult,
    pub compound: RunResult,
    pub rows: Vec<GenderRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "lowercase")]
pub enum ExperimentOutcome {
    Mono(RunResult),
    Multi(MultiResult),
    Cross(RunResult),
    Gender(Box<GenderResult>),
}

type ClassKey = (Option<Gender>, Emotion);

fn class_key(u: &Utterance, mode: LabelMode) -> ClassKey {
    match mode {
        LabelMode::Emotion => (None, u.emotion),
        LabelMode::GenderEmotion => (Some(u.gender), u.emotion),
    }
}

fn key_label(key: ClassKey) -> String {
    match key {
        (None, e) => e.label().to_string(),
        (Some(g), e) => compound_label(g, e),
    }
}

/// Sorted class names present among `examples` under `mode`.
pub fn class_list<'a>(examples: impl IntoIterator<Item = &'a Example>, mode: LabelMode) -> Vec<String> {
    let keys: BTreeSet<ClassKey> = examples.into_iter().map(|e| class_key(&e.utterance, mode)).collect();
    keys.into_iter().map(key_label).collect()
}

/// Feature rows, labels and ids for a selection of examples.
struct Design {
    x: Vec<Vec<f64>>,
    y: Vec<usize>,
    ids: Vec<String>,
}

fn design(examples: &[&Example], kinds: &[FeatureKind], mode: LabelMode, classes: &[String]) -> Result<Design, ExperimentError> {
    let mut d = Design { x: Vec::with_capacity(examples.len()), y: Vec::new(), ids: Vec::new() };
    for e in examples {
        let v = e
            .features
            .select(kinds)
            .ok_or_else(|| ExperimentError::MissingFeatures(format!("{} lacks one of {kinds:?}", e.utterance.path)))?;
        let label = key_label(class_key(&e.utterance, mode));
        let idx = classes.iter().position(|c| *c == label).ok_or_else(|| ExperimentError::InvalidSpec(format!("class {label} not in class list")))?;
        d.x.push(v.values);
        d.y.push(idx);
        d.ids.push(e.utterance.path.clone());
    }
    Ok(d)
}

struct Job {
    fold: usize,
    train: Vec<usize>,
    test: Vec<usize>,
    validate: bool,
    seed: u64,
}

struct JobOutput {
    predictions: Vec<Prediction>,
    summary: FoldSummary,
}

fn run_job(d: &Design, n_classes: usize, train_cfg: &TrainConfig, job: &Job) -> Result<JobOutput, ExperimentError> {
    let tx: Vec<Vec<f64>> = job.train.iter().map(|&i| d.x[i].clone()).collect();
    let ty: Vec<usize> = job.train.iter().map(|&i| d.y[i]).collect();
    let vx: Vec<Vec<f64>> = job.test.iter().map(|&i| d.x[i].clone()).collect();
    let vy: Vec<usize> = job.test.iter().map(|&i| d.y[i]).collect();
    let dim = tx.first().map_or(0, Vec::len);
    let cfg = TrainConfig { seed: job.seed, validation_fraction: 0.0, ..train_cfg.clone() };
    let model = init_model(dim, n_classes, job.seed)?;
    let validation = job.validate.then_some((vx.as_slice(), vy.as_slice()));
    let (model, history) = fit_with_validation(model, &tx, &ty, validation, &cfg)?;
    let mut predictions = Vec::with_capacity(job.test.len());
    for (&i, row) in job.test.iter().zip(&vx) {
        predictions.push(Prediction { fold: job.fold, id: d.ids[i].clone(), truth: d.y[i], predicted: model.predict_class(row)? });
    }
    let last = history.epochs.last();
    Ok(JobOutput {
        predictions,
        summary: FoldSummary {
            fold: job.fold,
            train_size: job.train.len(),
            test_size: job.test.len(),
            seed: job.seed,
            final_train_loss: last.map_or(f64::NAN, |e| e.train_loss),
            final_val_accuracy: last.and_then(|e| e.val_accuracy),
        },
    })
}

fn run_jobs<E: Executor>(exec: &E, d: &Design, n_classes: usize, cfg: &TrainConfig, jobs: &[Job]) -> Result<Vec<JobOutput>, ExperimentError> {
    exec.map(jobs.len(), |j| run_job(d, n_classes, cfg, &jobs[j])).into_iter().collect()
}

/// Seed stream reserved for fold assignment.
const FOLD_STREAM: u64 = u64::MAX;

fn select<'a>(examples: &'a [Example], languages: &[Language]) -> Result<Vec<&'a Example>, ExperimentError> {
    for &l in languages {
        if !examples.iter().any(|e| e.utterance.language == l) {
            return Err(ExperimentError::MissingLanguage(l));
        }
    }
    Ok(examples.iter().filter(|e| languages.contains(&e.utterance.language)).collect())
}

fn require_shared(examples: &[&Example], protocol: Protocol) -> Result<(), ExperimentError> {
    match examples.iter().find(|e| !e.utterance.emotion.is_shared()) {
        Some(e) => Err(ExperimentError::InvalidSpec(format!(
            "{protocol} runs need labels restricted to the shared set; found {} in {}",
            e.utterance.emotion, e.utterance.path
        ))),
        None => Ok(()),
    }
}

/// Stratified k-fold cross-validation over `examples`, stratifying on
/// `strata` (or grouping by speaker when the spec asks for it).
fn cross_validate<E: Executor, K: Ord + Clone + fmt::Debug>(
    spec: &ExperimentSpec,
    cell_id: &str,
    examples: &[&Example],
    strata: &[K],
    exec: &E,
) -> Result<RunResult, ExperimentError> {
    let classes = class_list(examples.iter().copied(), spec.label_mode);
    let d = design(examples, &spec.feature_set, spec.label_mode, &classes)?;
    let fold_seed = derive_seed(spec.seed, cell_id, FOLD_STREAM);
    let folds = if spec.speaker_independent {
        let speakers: Vec<(Language, &str)> = examples.iter().map(|e| (e.utterance.language, e.utterance.speaker_id.as_str())).collect();
        grouped_kfold(&speakers, spec.folds, fold_seed)?
    } else {
        let keyed: Vec<(K, &str)> = strata.iter().cloned().zip(d.y.iter().map(|&c| classes[c].as_str())).collect();
        stratified_kfold(&keyed, spec.folds, fold_seed)?
    };
    let jobs: Vec<Job> = (0..folds.len())
        .map(|f| Job { fold: f, train: training_indices(&folds, f), test: folds[f].clone(), validate: true, seed: derive_seed(spec.seed, cell_id, f as u64) })
        .collect();
    let outputs = run_jobs(exec, &d, classes.len(), &spec.train, &jobs)?;
    let mut predictions = Vec::new();
    let mut summaries = Vec::new();
    for o in outputs {
        predictions.extend(o.predictions);
        summaries.push(o.summary);
    }
    let report = MetricsReport::from_predictions(classes.clone(), &predictions)?;
    Ok(RunResult {
        cell_id: cell_id.to_string(),
        protocol: spec.protocol,
        train_languages: spec.train_languages.clone(),
        test_languages: spec.test_languages.clone(),
        feature_set: spec.feature_set.clone(),
        label_mode: spec.label_mode,
        classes,
        predictions,
        report,
        models_fitted: jobs.len(),
        folds: summaries,
    })
}

/// k-fold cross-validation within a single language.
pub fn run_mono_lingual<E: Executor>(spec: &ExperimentSpec, examples: &[Example], exec: &E) -> Result<RunResult, ExperimentError> {
    if spec.protocol != Protocol::Mono {
        return Err(ExperimentError::InvalidSpec(format!("expected a mono spec, got {}", spec.protocol)));
    }
    spec.validate()?;
    let chosen = select(examples, &spec.train_languages)?;
    let strata = alloc::vec![(); chosen.len()];
    cross_validate(spec, &spec.cell_id(), &chosen, &strata, exec)
}

/// Fit once on all of the training language, evaluate on each test language.
pub fn run_multi_lingual<E: Executor>(spec: &ExperimentSpec, examples: &[Example], exec: &E) -> Result<MultiResult, ExperimentError> {
    if spec.protocol != Protocol::Multi {
        return Err(ExperimentError::InvalidSpec(format!("expected a multi spec, got {}", spec.protocol)));
    }
    spec.validate()?;
    let train_language = spec.train_languages[0];
    let mut all_langs = spec.train_languages.clone();
    all_langs.extend(&spec.test_languages);
    let chosen = select(examples, &all_langs)?;
    require_shared(&chosen, spec.protocol)?;
    let classes = class_list(chosen.iter().copied(), spec.label_mode);
    let d = design(&chosen, &spec.feature_set, spec.label_mode, &classes)?;
    let cell_id = spec.cell_id();
    let seed = derive_seed(spec.seed, &cell_id, 0);
    let train: Vec<usize> = (0..chosen.len()).filter(|&i| chosen[i].utterance.language == train_language).collect();
    let test: Vec<usize> = (0..chosen.len()).filter(|&i| chosen[i].utterance.language != train_language).collect();
    let job = Job { fold: 0, train, test, validate: false, seed };
    let output = run_jobs(exec, &d, classes.len(), &spec.train, core::slice::from_ref(&job))?.remove(0);

    let mut results = Vec::new();
    for &lang in &spec.test_languages {
        let predictions: Vec<Prediction> =
            output.predictions.iter().zip(&job.test).filter(|(_, &i)| chosen[i].utterance.language == lang).map(|(p, _)| p.clone()).collect();
        let report = MetricsReport::from_predictions(classes.clone(), &predictions)?;
        results.push(RunResult {
            cell_id: format!("{cell_id}->{}", lang.id()),
            protocol: Protocol::Multi,
            train_languages: spec.train_languages.clone(),
            test_languages: alloc::vec![lang],
            feature_set: spec.feature_set.clone(),
            label_mode: spec.label_mode,
            classes: classes.clone(),
            predictions,
            report,
            models_fitted: 1,
            folds: alloc::vec![FoldSummary { test_size: 0, ..output.summary.clone() }],
        });
    }
    for r in &mut results {
        r.folds[0].test_size = r.predictions.len();
    }
    Ok(MultiResult { train_language, results, models_fitted: 1 })
}

/// Pooled k-fold cross-validation over several languages, stratified jointly
/// on language and label.
pub fn run_cross_lingual<E: Executor>(spec: &ExperimentSpec, examples: &[Example], exec: &E) -> Result<RunResult, ExperimentError> {
    if spec.protocol != Protocol::Cross {
        return Err(ExperimentError::InvalidSpec(format!("expected a cross spec, got {}", spec.protocol)));
    }
    spec.validate()?;
    let chosen = select(examples, &spec.train_languages)?;
    require_shared(&chosen, spec.protocol)?;
    let strata: Vec<Language> = chosen.iter().map(|e| e.utterance.language).collect();
    cross_validate(spec, &spec.cell_id(), &chosen, &strata, exec)
}

/// Emotion-only baseline followed by a run on compound gender-emotion labels.
pub fn run_gender<E: Executor>(spec: &ExperimentSpec, examples: &[Example], exec: &E) -> Result<GenderResult, ExperimentError> {
    if spec.protocol != Protocol::Gender {
        return Err(ExperimentError::InvalidSpec(format!("expected a gender spec, got {}", spec.protocol)));
    }
    spec.validate()?;
    let language = spec.train_languages[0];
    let baseline_spec = ExperimentSpec { protocol: Protocol::Mono, label_mode: LabelMode::Emotion, ..spec.clone() };
    let baseline = run_mono_lingual(&baseline_spec, examples, exec)?;
    let chosen = select(examples, &spec.train_languages)?;
    let strata = alloc::vec![(); chosen.len()];
    let compound = cross_validate(spec, &spec.cell_id(), &chosen, &strata, exec)?;

    let emotions: BTreeSet<Emotion> = chosen.iter().map(|e| e.utterance.emotion).collect();
    let f1 = |r: &RunResult, label: &str| r.report.class(label).filter(|c| c.support > 0).map(|c| c.f1);
    let rows = emotions
        .into_iter()
        .map(|e| GenderRow {
            emotion: e,
            baseline_f1: f1(&baseline, e.label()),
            male_f1: f1(&compound, &compound_label(Gender::Male, e)),
            female_f1: f1(&compound, &compound_label(Gender::Female, e)),
        })
        .collect();
    Ok(GenderResult { language, baseline, compound, rows })
}

pub fn run_experiment<E: Executor>(spec: &ExperimentSpec, examples: &[Example], exec: &E) -> Result<ExperimentOutcome, ExperimentError> {
    Ok(match spec.protocol {
        Protocol::Mono => ExperimentOutcome::Mono(run_mono_lingual(spec, examples, exec)?),
        Protocol::Multi => ExperimentOutcome::Multi(run_multi_lingual(spec, examples, exec)?),
        Protocol::Cross => ExperimentOutcome::Cross(run_cross_lingual(spec, examples, exec)?),
        Protocol::Gender => ExperimentOutcome::Gender(Box::new(run_gender(spec, examples, exec)?)),
    })
}

/// Every non-empty subset of `candidates` with at most `max_size` members,
/// by size, then in candidate order.
pub fn feature_combinations(candidates: &[FeatureKind], max_size: usize) -> Vec<Vec<FeatureKind>> {
    let n = candidates.len();
    let mut out = Vec::new();
    for size in 1..=max_size.min(n) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            out.push(idx.iter().map(|&i| candidates[i]).collect());
            let Some(pos) = (0..size).rev().find(|&p| idx[p] < n - size + p) else { break };
            idx[pos] += 1;
            for q in pos + 1..size {
                idx[q] = idx[q - 1] + 1;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRow {
    pub kinds: Vec<FeatureKind>,
    pub dims: usize,
    /// Mean macro-F1 of the mono-lingual run for each language.
    pub f1: Vec<(Language, f64)>,
    pub mean_f1: f64,
}

/// Mono-lingual cross-validation for each feature set up to `max_set_size`
/// kinds in each language, ranked by mean F1 (descending), then by fewer
/// dimensions.
pub fn run_feature_search<E: Executor>(
    base: &ExperimentSpec,
    examples: &[Example],
    languages: &[Language],
    candidates: &[FeatureKind],
    max_set_size: usize,
    exec: &E,
) -> Result<Vec<SearchRow>, ExperimentError> {
    if candidates.is_empty() {
        return Err(ExperimentError::InvalidSpec("feature search needs at least one candidate kind".into()));
    }
    if languages.is_empty() {
        return Err(ExperimentError::InvalidSpec("feature search needs at least one language".into()));
    }
    validate_set(candidates)?;
    let mut rows = Vec::new();
    for kinds in feature_combinations(candidates, max_set_size.max(1)) {
        let mut f1 = Vec::new();
        let mut dims = 0;
        for &lang in languages {
            let spec = ExperimentSpec {
                protocol: Protocol::Mono,
                label_mode: LabelMode::Emotion,
                feature_set: kinds.clone(),
                train_languages: alloc::vec![lang],
                test_languages: alloc::vec![lang],
                ..base.clone()
            };
            let r = run_mono_lingual(&spec, examples, exec)?;
            dims = examples.iter().find(|e| e.utterance.language == lang).and_then(|e| e.features.select(&kinds)).map_or(0, |v| v.len());
            f1.push((lang, r.report.mean_macro_f1));
        }
        let mean_f1 = f1.iter().map(|p| p.1).sum::<f64>() / f1.len() as f64;
        rows.push(SearchRow { kinds, dims, f1, mean_f1 });
    }
    rows.sort_by(|a, b| b.mean_f1.total_cmp(&a.mean_f1).then(a.dims.cmp(&b.dims)).then(a.kinds.cmp(&b.kinds)));
    Ok(rows)
}
