//! Dataset scanning and JSON Lines manifests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serkit_core::experiments::{parse_filename, Dataset, Emotion, Gender, SkipReason, Utterance};
use walkdir::WalkDir;

use crate::atomic::{read_jsonl, write_atomic, write_jsonl};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub utterances: Vec<Utterance>,
    pub skipped: Vec<(String, SkipReason)>,
}

impl ScanResult {
    /// One line per skipped file: `path<TAB>reason`.
    pub fn skip_report(&self) -> String {
        self.skipped.iter().map(|(p, r)| format!("{p}\t{r}\n")).collect()
    }
}

/// Walk `root` in file-name order and parse every `.wav` file with the
/// naming convention of `dataset`.
pub fn scan_dataset(root: &Path, dataset: Dataset) -> Result<ScanResult> {
    if !root.is_dir() {
        return Err(Error::io(root, std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory")));
    }
    let mut utterances = Vec::new();
    let mut skipped = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| Error::io(root, e.into()))?;
        if !entry.file_type().is_file() {
            continue;
        }
        let is_wav = entry.path().extension().is_some_and(|e| e.eq_ignore_ascii_case("wav"));
        if !is_wav {
            continue;
        }
        let path = entry.path().to_string_lossy().into_owned();
        match parse_filename(dataset, &path) {
            Ok(u) => utterances.push(u),
            Err(reason) => skipped.push((path, reason)),
        }
    }
    if utterances.is_empty() {
        return Err(Error::EmptyManifest(root.to_path_buf()));
    }
    Ok(ScanResult { utterances, skipped })
}

pub fn write_manifest(path: &Path, utterances: &[Utterance]) -> Result<()> {
    write_jsonl(path, utterances)
}

pub fn write_skip_report(path: &Path, scan: &ScanResult) -> Result<()> {
    write_atomic(path, scan.skip_report().as_bytes())
}

/// Read a manifest. Relative utterance paths that do not exist from the
/// working directory are resolved against the manifest's directory.
pub fn read_manifest(path: &Path) -> Result<Vec<Utterance>> {
    let mut rows: Vec<Utterance> = read_jsonl(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    for u in &mut rows {
        let p = PathBuf::from(&u.path);
        if p.is_relative() && !p.exists() && base.join(&p).exists() {
            u.path = base.join(&p).to_string_lossy().into_owned();
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyManifest(path.to_path_buf()));
    }
    Ok(rows)
}

/// Utterance counts per emotion and per gender.
pub fn summarize(utterances: &[Utterance]) -> String {
    let mut by_emotion: BTreeMap<Emotion, [usize; 2]> = BTreeMap::new();
    for u in utterances {
        by_emotion.entry(u.emotion).or_default()[(u.gender == Gender::Female) as usize] += 1;
    }
    let mut out = format!("{:<10} {:>6} {:>6} {:>6}\n", "emotion", "male", "female", "total");
    let mut totals = [0usize; 2];
    for (e, [m, f]) in &by_emotion {
        out.push_str(&format!("{:<10} {m:>6} {f:>6} {:>6}\n", e.label(), m + f));
        totals[0] += m;
        totals[1] += f;
    }
    out.push_str(&format!("{:<10} {:>6} {:>6} {:>6}\n", "all", totals[0], totals[1], totals[0] + totals[1]));
    out
}
