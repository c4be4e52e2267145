//! Report artifacts: per-fold predictions, CSV metrics and text tables.
//!
//! Every table and CSV row is rendered from persisted predictions, so a run
//! directory can be re-rendered byte for byte with `serkit report`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serkit_core::experiments::{
    Emotion, ExperimentOutcome, FoldSummary, LabelMode, Language, MetricsReport, Prediction, RunResult, SearchRow,
};
use serkit_core::features::FeatureKind;

use crate::atomic::{read_json, write_atomic, write_json};
use crate::error::{Error, Result};
use crate::provenance::Provenance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Mono,
    Multi,
    Cross,
    GenderBaseline,
    GenderCompound,
}

/// Everything about a cell except its metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMeta {
    pub cell_id: String,
    pub role: Role,
    pub train_languages: Vec<Language>,
    pub test_languages: Vec<Language>,
    pub label_mode: LabelMode,
    pub feature_set: Vec<FeatureKind>,
    pub classes: Vec<String>,
    pub models_fitted: usize,
    pub folds: Vec<FoldSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub meta: CellMeta,
    pub predictions: Vec<Prediction>,
    pub report: MetricsReport,
}

fn cell(role: Role, r: &RunResult) -> Cell {
    Cell {
        meta: CellMeta {
            cell_id: r.cell_id.clone(),
            role,
            train_languages: r.train_languages.clone(),
            test_languages: r.test_languages.clone(),
            label_mode: r.label_mode,
            feature_set: r.feature_set.clone(),
            classes: r.classes.clone(),
            models_fitted: r.models_fitted,
            folds: r.folds.clone(),
        },
        predictions: r.predictions.clone(),
        report: r.report.clone(),
    }
}

pub fn cells_from_outcome(outcome: &ExperimentOutcome) -> Vec<Cell> {
    match outcome {
        ExperimentOutcome::Mono(r) => vec![cell(Role::Mono, r)],
        ExperimentOutcome::Cross(r) => vec![cell(Role::Cross, r)],
        ExperimentOutcome::Multi(m) => m.results.iter().map(|r| cell(Role::Multi, r)).collect(),
        ExperimentOutcome::Gender(g) => vec![cell(Role::GenderBaseline, &g.baseline), cell(Role::GenderCompound, &g.compound)],
    }
}

/// One line of `predictions.jsonl`, with labels spelled out for audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub cell_id: String,
    pub fold: usize,
    pub id: String,
    pub truth: String,
    pub predicted: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum PredictionLine {
    Header { provenance: Provenance },
    Row(PredictionRecord),
}

pub const CELLS_FILE: &str = "cells.json";
pub const PREDICTIONS_FILE: &str = "predictions.jsonl";
pub const PROVENANCE_FILE: &str = "provenance.json";
pub const METRICS_CSV: &str = "metrics.csv";
pub const TABLES_FILE: &str = "tables.txt";

pub fn write_predictions(path: &Path, cells: &[Cell], prov: &Provenance) -> Result<()> {
    let mut text = serde_json::to_string(&PredictionLine::Header { provenance: prov.clone() }).map_err(|e| Error::parse(path, e))?;
    text.push('\n');
    for c in cells {
        for p in &c.predictions {
            let rec = PredictionRecord {
                cell_id: c.meta.cell_id.clone(),
                fold: p.fold,
                id: p.id.clone(),
                truth: c.meta.classes[p.truth].clone(),
                predicted: c.meta.classes[p.predicted].clone(),
            };
            text.push_str(&serde_json::to_string(&PredictionLine::Row(rec)).map_err(|e| Error::parse(path, e))?);
            text.push('\n');
        }
    }
    write_atomic(path, text.as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CellsFile {
    provenance: Provenance,
    cells: Vec<CellMeta>,
}

/// Persist the run: provenance, cell metadata, predictions, CSV and tables.
pub fn write_run(dir: &Path, cells: &[Cell], prov: &Provenance) -> Result<()> {
    write_json(&dir.join(PROVENANCE_FILE), prov)?;
    write_json(&dir.join(CELLS_FILE), &CellsFile { provenance: prov.clone(), cells: cells.iter().map(|c| c.meta.clone()).collect() })?;
    write_predictions(&dir.join(PREDICTIONS_FILE), cells, prov)?;
    render_run(dir, cells, prov)
}

/// Write the CSV and text tables for `cells`.
pub fn render_run(dir: &Path, cells: &[Cell], prov: &Provenance) -> Result<()> {
    write_atomic(&dir.join(METRICS_CSV), render_csv(cells, prov).as_bytes())?;
    write_atomic(&dir.join(TABLES_FILE), render_tables(cells, prov).as_bytes())
}

/// Rebuild cells (and their metrics) from a run directory's predictions.
pub fn load_run(dir: &Path) -> Result<(Provenance, Vec<Cell>)> {
    let cells_path = dir.join(CELLS_FILE);
    let file: CellsFile = read_json(&cells_path)?;
    let pred_path = dir.join(PREDICTIONS_FILE);
    let text = std::fs::read_to_string(&pred_path).map_err(|e| Error::io(&pred_path, e))?;
    let mut by_cell: BTreeMap<String, Vec<PredictionRecord>> = BTreeMap::new();
    for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        match serde_json::from_str::<PredictionLine>(line).map_err(|e| Error::parse(&pred_path, format!("line {}: {e}", n + 1)))? {
            PredictionLine::Header { .. } => {}
            PredictionLine::Row(r) => by_cell.entry(r.cell_id.clone()).or_default().push(r),
        }
    }
    let mut cells = Vec::new();
    for meta in file.cells {
        let index = |label: &str| {
            meta.classes.iter().position(|c| c == label).ok_or_else(|| Error::parse(&pred_path, format!("unknown class {label} in {}", meta.cell_id)))
        };
        let mut predictions = Vec::new();
        for r in by_cell.remove(&meta.cell_id).unwrap_or_default() {
            predictions.push(Prediction { fold: r.fold, id: r.id, truth: index(&r.truth)?, predicted: index(&r.predicted)? });
        }
        let report = MetricsReport::from_predictions(meta.classes.clone(), &predictions)?;
        cells.push(Cell { meta, predictions, report });
    }
    Ok((file.provenance, cells))
}

fn split_label(label: &str) -> (&str, &str) {
    match label.split_once('-') {
        Some((g @ ("Male" | "Female"), e)) => (g, e),
        _ => ("all", label),
    }
}

fn langs(l: &[Language]) -> String {
    l.iter().map(|l| l.id()).collect::<Vec<_>>().join("+")
}

/// One row per cell, class and gender, plus a `macro` row per cell.
pub fn render_csv(cells: &[Cell], prov: &Provenance) -> String {
    let mut out = prov.comment_header("#");
    out.push_str("cell_id,role,train_languages,test_languages,label_mode,gender,class,precision,recall,f1,support\n");
    for c in cells {
        let m = &c.meta;
        let prefix = format!(
            "{},{},{},{},{}",
            m.cell_id,
            serde_json::to_value(m.role).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
            langs(&m.train_languages),
            langs(&m.test_languages),
            if m.label_mode == LabelMode::Emotion { "emotion" } else { "gender_emotion" }
        );
        for cm in &c.report.mean {
            let (g, e) = split_label(&cm.label);
            let _ = writeln!(out, "{prefix},{g},{e},{:.6},{:.6},{:.6},{}", cm.precision, cm.recall, cm.f1, cm.support);
        }
        let n = c.report.mean.len().max(1) as f64;
        let p = c.report.mean.iter().map(|c| c.precision).sum::<f64>() / n;
        let r = c.report.mean.iter().map(|c| c.recall).sum::<f64>() / n;
        let support: usize = c.report.mean.iter().map(|c| c.support).sum();
        let _ = writeln!(out, "{prefix},all,macro,{p:.6},{r:.6},{:.6},{support}", c.report.mean_macro_f1);
    }
    out
}

fn pad_table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols).map(|i| rows.iter().filter_map(|r| r.get(i)).map(|s| s.chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for (n, r) in rows.iter().enumerate() {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(i, s)| if i == 0 { format!("{s:<w$}", w = widths[i]) } else { format!("{s:>w$}", w = widths[i]) })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
        if n == 0 {
            out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * cols.saturating_sub(1)));
            out.push('\n');
        }
    }
    out
}

fn f2(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.2}"))
}

/// Macro-F1 by protocol (rows) and test language (columns).
fn protocol_table(cells: &[Cell]) -> Option<String> {
    let relevant: Vec<&Cell> = cells.iter().filter(|c| matches!(c.meta.role, Role::Mono | Role::Multi | Role::Cross)).collect();
    if relevant.is_empty() {
        return None;
    }
    let mut languages: BTreeSet<Language> = BTreeSet::new();
    for c in &relevant {
        if c.meta.role != Role::Cross {
            languages.extend(&c.meta.test_languages);
            languages.extend(&c.meta.train_languages);
        }
    }
    let has_cross = relevant.iter().any(|c| c.meta.role == Role::Cross);
    let mut header = vec!["Protocol".to_string()];
    header.extend(languages.iter().map(|l| l.label().to_string()));
    if has_cross {
        header.push("Combined".into());
    }
    let mut rows = vec![header];
    let mono: BTreeMap<Language, f64> =
        relevant.iter().filter(|c| c.meta.role == Role::Mono).map(|c| (c.meta.train_languages[0], c.report.mean_macro_f1)).collect();
    let mut notes = Vec::new();
    if !mono.is_empty() {
        let mut row = vec!["Mono-Ling.".to_string()];
        row.extend(languages.iter().map(|l| f2(mono.get(l).copied())));
        if has_cross {
            row.push("-".into());
        }
        rows.push(row);
    }
    let mut multi: BTreeMap<Language, BTreeMap<Language, f64>> = BTreeMap::new();
    for c in relevant.iter().filter(|c| c.meta.role == Role::Multi) {
        multi.entry(c.meta.train_languages[0]).or_default().insert(c.meta.test_languages[0], c.report.mean_macro_f1);
    }
    for (train, tests) in &multi {
        let mut row = vec![format!("Multi-Ling.-{}", train.short())];
        for l in &languages {
            row.push(if l == train {
                match mono.get(l) {
                    Some(v) => {
                        notes.push("* diagonal of a multi-lingual row repeats the mono-lingual result");
                        format!("{v:.2}*")
                    }
                    None => "-".into(),
                }
            } else {
                f2(tests.get(l).copied())
            });
        }
        if has_cross {
            row.push("-".into());
        }
        rows.push(row);
    }
    for c in relevant.iter().filter(|c| c.meta.role == Role::Cross) {
        let mut row = vec!["Cross-Ling.".to_string()];
        row.extend(languages.iter().map(|_| "-".to_string()));
        row.push(format!("{:.2}", c.report.mean_macro_f1));
        rows.push(row);
    }
    let mut out = String::from("Macro-F1 by protocol and test language\n\n");
    out.push_str(&pad_table(&rows));
    notes.dedup();
    if relevant.iter().any(|c| matches!(c.meta.role, Role::Multi | Role::Cross)) {
        notes.push("multi- and cross-lingual runs use only the shared labels Anger, Fear, Joy, Sadness, Disgust, Neutral");
    }
    for n in notes {
        out.push_str(n);
        out.push('\n');
    }
    Some(out)
}

/// Per-emotion F1: baseline, male and female compound labels per language.
fn gender_table(cells: &[Cell]) -> Option<String> {
    let mut per_lang: BTreeMap<Language, (Option<&Cell>, Option<&Cell>)> = BTreeMap::new();
    for c in cells {
        let slot = per_lang.entry(c.meta.train_languages[0]).or_default();
        match c.meta.role {
            Role::GenderBaseline => slot.0 = Some(c),
            Role::GenderCompound => slot.1 = Some(c),
            _ => {}
        }
    }
    per_lang.retain(|_, (b, g)| b.is_some() || g.is_some());
    if per_lang.is_empty() {
        return None;
    }
    let f1 = |c: Option<&Cell>, label: &str| c.and_then(|c| c.report.class(label)).filter(|m| m.support > 0).map(|m| m.f1);
    let mut emotions: BTreeSet<Emotion> = BTreeSet::new();
    for (b, g) in per_lang.values() {
        for c in [b, g].into_iter().flatten() {
            for label in &c.meta.classes {
                let (_, e) = split_label(label);
                if let Some(e) = Emotion::SHARED.iter().chain(&[Emotion::Surprise, Emotion::Boredom]).find(|x| x.label() == e) {
                    emotions.insert(*e);
                }
            }
        }
    }
    let mut header = vec!["Emotion".to_string()];
    for l in per_lang.keys() {
        for col in ["Baseline", "Male", "Female"] {
            header.push(format!("{} {col}", l.short()));
        }
    }
    let mut rows = vec![header];
    for e in emotions {
        let mut row = vec![e.label().to_string()];
        for (b, g) in per_lang.values() {
            row.push(f2(f1(*b, e.label())));
            row.push(f2(f1(*g, &format!("Male-{}", e.label()))));
            row.push(f2(f1(*g, &format!("Female-{}", e.label()))));
        }
        rows.push(row);
    }
    let mut out = String::from("F1 per emotion without gender (baseline) and with gender-emotion labels\n\n");
    out.push_str(&pad_table(&rows));
    Some(out)
}

fn cell_detail(c: &Cell) -> String {
    let m = &c.meta;
    let feats: Vec<&str> = m.feature_set.iter().map(|k| k.id()).collect();
    let mut out = format!(
        "Cell {}\n  train: {}  test: {}  features: {}  models fitted: {}\n",
        m.cell_id,
        langs(&m.train_languages),
        langs(&m.test_languages),
        feats.join(","),
        m.models_fitted
    );
    let folds: Vec<String> = c.report.folds.iter().map(|f| format!("{:.4}", f.macro_f1)).collect();
    let _ = writeln!(out, "  macro-F1 per fold: {}  mean: {:.4}  mean accuracy: {:.4}\n", folds.join(" "), c.report.mean_macro_f1, c.report.mean_accuracy);
    let mut rows = vec![vec!["Class".to_string(), "Precision".into(), "Recall".into(), "F1".into(), "Support".into()]];
    for cm in &c.report.mean {
        rows.push(vec![cm.label.clone(), format!("{:.4}", cm.precision), format!("{:.4}", cm.recall), format!("{:.4}", cm.f1), cm.support.to_string()]);
    }
    out.push_str(&pad_table(&rows));
    out.push_str("\nConfusion matrix (rows: truth, columns: prediction)\n");
    let mut conf = vec![std::iter::once(String::new()).chain((0..m.classes.len()).map(|i| format!("[{i}]"))).collect::<Vec<_>>()];
    for (i, row) in c.report.confusion.iter().enumerate() {
        conf.push(std::iter::once(format!("[{i}] {}", m.classes[i])).chain(row.iter().map(|v| v.to_string())).collect());
    }
    out.push_str(&pad_table(&conf));
    out
}

pub fn render_tables(cells: &[Cell], prov: &Provenance) -> String {
    let mut out = prov.comment_header("#");
    out.push('\n');
    for section in [protocol_table(cells), gender_table(cells)].into_iter().flatten() {
        out.push_str(&section);
        out.push('\n');
    }
    for c in cells {
        out.push_str(&cell_detail(c));
        out.push('\n');
    }
    out
}

/// Mean absolute amplitude per language.
pub type AmplitudeRow = Vec<(Language, f64)>;

/// Feature-set ranking: F1 per language and the mean, best first.
pub fn render_search_table(rows: &[SearchRow], amplitude: &AmplitudeRow, prov: &Provenance) -> String {
    let langs: Vec<Language> = rows.first().map(|r| r.f1.iter().map(|p| p.0).collect()).unwrap_or_default();
    let mut table = vec![std::iter::once("Feature set".to_string())
        .chain(langs.iter().map(|l| l.label().to_string()))
        .chain(["Mean".to_string(), "Dims".to_string()])
        .collect::<Vec<_>>()];
    for r in rows {
        let name = r.kinds.iter().map(|k| k.label()).collect::<Vec<_>>().join(" + ");
        let mut row = vec![name];
        row.extend(r.f1.iter().map(|p| format!("{:.2}", p.1)));
        row.push(format!("{:.2}", r.mean_f1));
        row.push(r.dims.to_string());
        table.push(row);
    }
    if !amplitude.is_empty() {
        let mut row = vec!["Average absolute amplitude".to_string()];
        for l in &langs {
            row.push(amplitude.iter().find(|p| p.0 == *l).map_or("-".into(), |p| format!("{:.2}", p.1)));
        }
        row.push(format!("{:.2}", amplitude.iter().map(|p| p.1).sum::<f64>() / amplitude.len() as f64));
        row.push(String::new());
        table.push(row);
    }
    let mut out = prov.comment_header("#");
    out.push_str("\nMono-lingual macro-F1 per feature set, ranked by mean\n\n");
    out.push_str(&pad_table(&table));
    out
}

pub fn render_search_csv(rows: &[SearchRow], prov: &Provenance) -> String {
    let mut out = prov.comment_header("#");
    out.push_str("rank,features,dims,language,f1,mean_f1\n");
    for (i, r) in rows.iter().enumerate() {
        let feats: Vec<&str> = r.kinds.iter().map(|k| k.id()).collect();
        for (l, f) in &r.f1 {
            let _ = writeln!(out, "{},{},{},{},{f:.6},{:.6}", i + 1, feats.join("+"), r.dims, l.id(), r.mean_f1);
        }
    }
    out
}
