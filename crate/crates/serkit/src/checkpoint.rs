//! Trained model checkpoints as JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serkit_core::experiments::LabelMode;
use serkit_core::features::FeatureKind;
use serkit_core::model::CnnModel;

use crate::atomic::{read_json, write_json};
use crate::error::{Error, Result};
use crate::provenance::Provenance;

pub const CHECKPOINT_FORMAT: &str = "serkit-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub classes: Vec<String>,
    pub feature_set: Vec<FeatureKind>,
    pub label_mode: LabelMode,
    pub provenance: Provenance,
    pub model: CnnModel,
}

impl Checkpoint {
    pub fn new(model: CnnModel, classes: Vec<String>, feature_set: Vec<FeatureKind>, label_mode: LabelMode, provenance: Provenance) -> Self {
        Self { format: CHECKPOINT_FORMAT.into(), version: CHECKPOINT_VERSION, classes, feature_set, label_mode, provenance, model }
    }
}

/// Floats are written with enough digits to round-trip exactly.
pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    write_json(path, ckpt)
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let ckpt: Checkpoint = read_json(path)?;
    if ckpt.format != CHECKPOINT_FORMAT {
        return Err(Error::parse(path, format!("not a checkpoint (format `{}`)", ckpt.format)));
    }
    if ckpt.version != CHECKPOINT_VERSION {
        return Err(Error::parse(path, format!("unsupported checkpoint version {}", ckpt.version)));
    }
    if ckpt.classes.len() != ckpt.model.n_classes {
        return Err(Error::parse(path, "class list does not match the model output size"));
    }
    Ok(ckpt)
}
