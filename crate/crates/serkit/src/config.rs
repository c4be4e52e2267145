//! Experiment configuration files (TOML).
//!
//! ```toml
//! protocol = "mono"                  # mono | multi | cross | gender
//! seed = 42
//! folds = 5
//! features = ["mfcc", "mel", "contrast"]
//! train_languages = ["english"]
//! test_languages = ["english"]       # defaults to train_languages
//!
//! [data]
//! manifests = ["ravdess.jsonl"]      # relative to this file
//!
//! [training]
//! epochs = 150
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serkit_core::experiments::{ExperimentSpec, LabelMode, Language, Protocol};
use serkit_core::features::{FeatureConfig, FeatureKind};
use serkit_core::model::TrainConfig;

use crate::error::{Error, Result};

fn default_folds() -> usize {
    5
}

fn default_features() -> Vec<String> {
    FeatureKind::COMBINED.iter().map(|k| k.id().to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub protocol: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_features")]
    pub features: Vec<String>,
    pub train_languages: Vec<String>,
    #[serde(default)]
    pub test_languages: Vec<String>,
    #[serde(default)]
    pub speaker_independent: bool,
    /// Drop utterances outside the six shared labels. Defaults to on for
    /// multi- and cross-lingual runs, which require it.
    #[serde(default)]
    pub restrict_to_shared: Option<bool>,
    pub data: DataConfig,
    #[serde(default)]
    pub training: TrainingConfig,
    #[serde(default)]
    pub search: Option<SearchConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub manifests: Vec<PathBuf>,
    /// Optional precomputed feature files from `serkit extract`.
    #[serde(default)]
    pub feature_files: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self { epochs: t.epochs, batch_size: t.batch_size, learning_rate: t.learning_rate }
    }
}

/// Rank single features and their combinations instead of running one
/// protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub candidates: Vec<String>,
    pub max_set_size: usize,
}

impl ExperimentConfig {
    /// Parse a config file; relative data paths are resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: ExperimentConfig = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in cfg.data.manifests.iter_mut().chain(cfg.data.feature_files.iter_mut()) {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn protocol(&self) -> Result<Protocol> {
        self.protocol.parse().map_err(|e: serkit_core::experiments::ExperimentError| Error::Config(e.to_string()))
    }

    pub fn feature_kinds(&self) -> Result<Vec<FeatureKind>> {
        FeatureKind::parse_list(&self.features.join(",")).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn restrict_to_shared(&self) -> Result<bool> {
        let required = matches!(self.protocol()?, Protocol::Multi | Protocol::Cross);
        match self.restrict_to_shared {
            Some(false) if required => Err(Error::Config("multi- and cross-lingual runs require restrict_to_shared = true".into())),
            Some(v) => Ok(v),
            None => Ok(required),
        }
    }

    pub fn search_candidates(&self) -> Result<Option<(Vec<FeatureKind>, usize)>> {
        match &self.search {
            None => Ok(None),
            Some(s) => {
                let kinds = FeatureKind::parse_list(&s.candidates.join(",")).map_err(|e| Error::Config(e.to_string()))?;
                if s.max_set_size == 0 {
                    return Err(Error::Config("search.max_set_size must be at least 1".into()));
                }
                Ok(Some((kinds, s.max_set_size)))
            }
        }
    }

    /// Build and validate the experiment spec.
    pub fn spec(&self) -> Result<ExperimentSpec> {
        let protocol = self.protocol()?;
        let langs = |v: &[String]| -> Result<Vec<Language>> {
            v.iter().map(|s| s.parse::<Language>().map_err(|e| Error::Config(e.to_string()))).collect()
        };
        let train_languages = langs(&self.train_languages)?;
        let test_languages = if self.test_languages.is_empty() && protocol != Protocol::Multi {
            train_languages.clone()
        } else {
            langs(&self.test_languages)?
        };
        let spec = ExperimentSpec {
            protocol,
            feature_set: self.feature_kinds()?,
            train_languages,
            test_languages,
            label_mode: if protocol == Protocol::Gender { LabelMode::GenderEmotion } else { LabelMode::Emotion },
            folds: self.folds,
            seed: self.seed,
            speaker_independent: self.speaker_independent,
            train: TrainConfig {
                epochs: self.training.epochs,
                batch_size: self.training.batch_size,
                learning_rate: self.training.learning_rate,
                ..TrainConfig::default()
            },
        };
        if self.search.is_some() {
            // A search runs one mono-lingual cell per language; check the first.
            if protocol != Protocol::Mono {
                return Err(Error::Config("feature search runs mono-lingual cells; set protocol = \"mono\"".into()));
            }
            let first = spec.train_languages.first().copied().ok_or_else(|| Error::Config("train_languages is empty".into()))?;
            let one = ExperimentSpec { train_languages: vec![first], test_languages: vec![first], ..spec.clone() };
            one.validate().map_err(|e| Error::Config(e.to_string()))?;
        } else {
            spec.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(spec)
    }

    /// Features to extract: the spec's set plus any search candidates.
    pub fn kinds_to_extract(&self) -> Result<Vec<FeatureKind>> {
        let mut kinds = self.feature_kinds()?;
        if let Some((cands, _)) = self.search_candidates()? {
            for k in cands {
                if !kinds.contains(&k) {
                    kinds.push(k);
                }
            }
        }
        Ok(kinds)
    }

    pub fn feature_config(&self) -> FeatureConfig {
        FeatureConfig::default()
    }
}
