//! Feature files: `clip_id<TAB>v0,v1,...` lines plus a JSON layout sidecar.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serkit_core::features::{FeatureConfig, FeatureKind, FeatureVector, LayoutEntry};

use crate::atomic::{read_json, write_atomic, write_json};
use crate::error::{Error, Result};
use crate::pipeline::Extracted;
use crate::provenance::Provenance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub kinds: Vec<FeatureKind>,
    pub entries: Vec<LayoutEntry>,
    pub vector_len: usize,
    pub sample_rate: u32,
    pub config: FeatureConfig,
    pub rows: usize,
    pub provenance: Provenance,
}

pub fn layout_path(features: &Path) -> PathBuf {
    let mut name = features.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".layout.json");
    features.with_file_name(name)
}

/// Shortest decimal that parses back to the same `f64`.
fn format_row(id: &str, values: &[f64]) -> String {
    let mut line = String::with_capacity(id.len() + values.len() * 20);
    line.push_str(id);
    line.push('\t');
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        line.push_str(&v.to_string());
    }
    line.push('\n');
    line
}

pub fn write_features(path: &Path, rows: &[Extracted], layout: &FeatureLayout) -> Result<()> {
    let text: String = rows.iter().map(|r| format_row(&r.utterance.path, &r.features.values)).collect();
    write_atomic(path, text.as_bytes())?;
    write_json(&layout_path(path), layout)
}

/// Read a feature file and its sidecar, keyed by clip id.
pub fn read_features(path: &Path) -> Result<(FeatureLayout, HashMap<String, FeatureVector>)> {
    let layout: FeatureLayout = read_json(&layout_path(path))?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = HashMap::new();
    for (n, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let bad = |m: &str| Error::parse(path, format!("line {}: {m}", n + 1));
        let (id, rest) = line.split_once('\t').ok_or_else(|| bad("missing tab"))?;
        let values: Vec<f64> = rest.split(',').map(str::parse).collect::<std::result::Result<_, _>>().map_err(|_| bad("bad number"))?;
        if values.len() != layout.vector_len {
            return Err(bad(&format!("{} values, layout expects {}", values.len(), layout.vector_len)));
        }
        out.insert(id.to_string(), FeatureVector { values, layout: layout.entries.clone() });
    }
    Ok((layout, out))
}
