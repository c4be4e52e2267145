//! Command-line interface.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serkit_core::experiments::{
    class_list, map_labels, run_experiment, run_feature_search, Dataset, Example, Language, LabelMode, LabelScheme, MetricsReport,
    Prediction, Utterance,
};
use serkit_core::features::{FeatureConfig, FeatureKind};
use serkit_core::model::{fit, init_model, TrainConfig};
use serkit_core::seed::derive_seed;

use crate::atomic::{write_atomic, write_json};
use crate::checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::features_io::{read_features, write_features, FeatureLayout};
use crate::manifest::{read_manifest, scan_dataset, summarize, write_manifest, write_skip_report};
use crate::pipeline::{extract_all, Extraction, RayonExecutor};
use crate::provenance::Provenance;
use crate::report::{
    cells_from_outcome, load_run, render_run, render_search_csv, render_search_table, write_run, AmplitudeRow, Cell, CellMeta, Role,
    PROVENANCE_FILE,
};
use crate::synth::{write_corpus, SynthConfig};

#[derive(Debug, Parser)]
#[command(name = "serkit", version, about = "Speech emotion recognition experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Experiment configuration file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Global seed; overrides the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Comma-separated feature kinds, e.g. `mfcc,mel,contrast`.
    #[arg(long, global = true)]
    pub features: Option<String>,
    /// Experiment protocol; overrides the config file.
    #[arg(long, global = true, value_enum)]
    pub protocol: Option<ProtocolArg>,
    /// Print progress to stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtocolArg {
    Mono,
    Multi,
    Cross,
    Gender,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DatasetArg {
    Ravdess,
    Emodb,
    Emovo,
    Synthetic,
}

impl From<DatasetArg> for Dataset {
    fn from(d: DatasetArg) -> Self {
        match d {
            DatasetArg::Ravdess => Dataset::Ravdess,
            DatasetArg::Emodb => Dataset::Emodb,
            DatasetArg::Emovo => Dataset::Emovo,
            DatasetArg::Synthetic => Dataset::Synthetic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LabelModeArg {
    Emotion,
    GenderEmotion,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a manifest from a dataset directory.
    Scan {
        #[arg(long)]
        root: PathBuf,
        #[arg(long, value_enum)]
        dataset: DatasetArg,
    },
    /// Extract aggregated feature vectors for every utterance of a manifest.
    Extract {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Train one model on a whole manifest and save a checkpoint.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_enum, default_value = "emotion")]
        label_mode: LabelModeArg,
        #[arg(long)]
        restrict_to_shared: bool,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Score a checkpoint on a manifest.
    Evaluate {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Run the protocol described by `--config`.
    Experiment,
    /// Re-render metrics and tables of a run directory from its predictions.
    Report {
        #[arg(long)]
        run: PathBuf,
    },
    /// Generate the synthetic corpus.
    Synth {
        #[arg(long, default_value_t = 6)]
        takes: usize,
        #[arg(long, default_value_t = 22_050)]
        sample_rate: u32,
        #[arg(long, default_value_t = 1.0)]
        duration: f64,
    },
}

struct Ctx {
    global: GlobalArgs,
}

impl Ctx {
    fn out(&self) -> PathBuf {
        self.global.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    fn seed(&self) -> u64 {
        self.global.seed.unwrap_or(0)
    }

    fn features(&self) -> Result<Vec<FeatureKind>> {
        match &self.global.features {
            Some(s) => FeatureKind::parse_list(s).map_err(|e| Error::Config(e.to_string())),
            None => Ok(FeatureKind::COMBINED.to_vec()),
        }
    }

    fn log(&self, msg: impl AsRef<str>) {
        if self.global.verbose > 0 {
            eprintln!("{}", msg.as_ref());
        }
    }
}

/// Run a parsed command line; the caller maps errors to exit codes.
pub fn run(cli: Cli) -> Result<()> {
    let ctx = Ctx { global: cli.global };
    match cli.command {
        Command::Scan { root, dataset } => cmd_scan(&ctx, &root, dataset.into()),
        Command::Extract { manifest } => cmd_extract(&ctx, &manifest),
        Command::Train { manifest, label_mode, restrict_to_shared, epochs } => {
            let mode = if label_mode == LabelModeArg::Emotion { LabelMode::Emotion } else { LabelMode::GenderEmotion };
            cmd_train(&ctx, &manifest, mode, restrict_to_shared, epochs)
        }
        Command::Evaluate { checkpoint, manifest } => cmd_evaluate(&ctx, &checkpoint, &manifest),
        Command::Experiment => {
            let config = ctx.global.config.clone().ok_or_else(|| Error::Config("experiment needs --config <file>".into()))?;
            cmd_experiment(&ctx, &config)
        }
        Command::Report { run } => cmd_report(&ctx, &run),
        Command::Synth { takes, sample_rate, duration } => {
            let cfg = SynthConfig { seed: ctx.seed(), takes, sample_rate, duration_secs: duration, ..SynthConfig::default() };
            cmd_synth(&ctx, &cfg)
        }
    }
}

fn cmd_scan(ctx: &Ctx, root: &Path, dataset: Dataset) -> Result<()> {
    let scan = scan_dataset(root, dataset)?;
    let out = ctx.out();
    write_manifest(&out.join("manifest.jsonl"), &scan.utterances)?;
    write_skip_report(&out.join("skipped.tsv"), &scan)?;
    println!("{}: {} utterances, {} skipped", dataset.label(), scan.utterances.len(), scan.skipped.len());
    print!("{}", summarize(&scan.utterances));
    Ok(())
}

#[derive(Serialize)]
struct ExtractArgs<'a> {
    manifest: &'a Path,
    kinds: &'a [FeatureKind],
    config: &'a FeatureConfig,
}

fn cmd_extract(ctx: &Ctx, manifest: &Path) -> Result<()> {
    let kinds = ctx.features()?;
    let utterances = read_manifest(manifest)?;
    let config = FeatureConfig::default();
    let extraction = extract_all(&utterances, &kinds, &config)?;
    let prov = Provenance::new("extract", ctx.seed(), &ExtractArgs { manifest, kinds: &kinds, config: &config });
    let layout = FeatureLayout {
        kinds: kinds.clone(),
        entries: extraction.rows.first().map(|r| r.features.layout.clone()).unwrap_or_default(),
        vector_len: config.vector_len(&kinds),
        sample_rate: serkit_core::audio::CANONICAL_SAMPLE_RATE,
        config,
        rows: extraction.rows.len(),
        provenance: prov.clone(),
    };
    let out = ctx.out();
    write_features(&out.join("features.tsv"), &extraction.rows, &layout)?;
    let failures: String = extraction.failures.iter().map(|(p, e)| format!("{p}\t{e}\n")).collect();
    write_atomic(&out.join("failures.tsv"), failures.as_bytes())?;
    println!("extracted {} of {} clips ({} values each)", extraction.rows.len(), utterances.len(), layout.vector_len);
    for (p, e) in extraction.failures.iter().take(10) {
        eprintln!("failed: {p}: {e}");
    }
    extraction.check_threshold()
}

fn labelled(utterances: &[Utterance], restrict: bool) -> Result<Vec<Utterance>> {
    let mapped = map_labels(utterances, LabelScheme, restrict)?;
    if mapped.is_empty() {
        return Err(Error::InvalidData("no utterances left after label mapping".into()));
    }
    Ok(mapped)
}

#[derive(Serialize)]
struct TrainArgs<'a> {
    manifest: &'a Path,
    kinds: &'a [FeatureKind],
    label_mode: LabelMode,
    restrict_to_shared: bool,
    train: &'a TrainConfig,
}

fn cmd_train(ctx: &Ctx, manifest: &Path, mode: LabelMode, restrict: bool, epochs: Option<usize>) -> Result<()> {
    let kinds = ctx.features()?;
    let utterances = labelled(&read_manifest(manifest)?, restrict)?;
    let extraction = extract_all(&utterances, &kinds, &FeatureConfig::default())?;
    extraction.check_threshold()?;
    let examples = extraction.examples();
    let classes = class_list(&examples, mode);
    let x: Vec<Vec<f64>> = examples.iter().map(|e| e.features.values.clone()).collect();
    let y: Vec<usize> = examples
        .iter()
        .map(|e| classes.iter().position(|c| *c == e.utterance.class_label(mode)).expect("class present"))
        .collect();
    let seed = derive_seed(ctx.seed(), "train", 0);
    let cfg = TrainConfig { seed, epochs: epochs.unwrap_or(TrainConfig::default().epochs), ..TrainConfig::default() };
    let prov = Provenance::new("train", ctx.seed(), &TrainArgs { manifest, kinds: &kinds, label_mode: mode, restrict_to_shared: restrict, train: &cfg });
    let model = init_model(x[0].len(), classes.len(), seed)?;
    ctx.log(format!("training on {} clips, {} classes", x.len(), classes.len()));
    let (model, history) = fit(model, &x, &y, &cfg)?;
    let out = ctx.out();
    save_checkpoint(&out.join("model.json"), &Checkpoint::new(model, classes, kinds, mode, prov.clone()))?;
    write_json(&out.join("history.json"), &(prov, history.clone()))?;
    println!("trained {} epochs, final loss {:.4}", history.len(), history.final_train_loss().unwrap_or(f64::NAN));
    Ok(())
}

#[derive(Serialize)]
struct EvaluateArgs<'a> {
    checkpoint: &'a str,
    manifest: &'a Path,
}

fn cmd_evaluate(ctx: &Ctx, checkpoint: &Path, manifest: &Path) -> Result<()> {
    let ckpt = load_checkpoint(checkpoint)?;
    let restrict = ckpt.classes.iter().all(|c| !c.ends_with("Boredom") && !c.ends_with("Surprise"));
    let utterances = labelled(&read_manifest(manifest)?, restrict)?;
    let extraction = extract_all(&utterances, &ckpt.feature_set, &FeatureConfig::default())?;
    extraction.check_threshold()?;
    let mut predictions = Vec::new();
    let mut unknown = 0;
    for r in &extraction.rows {
        let Some(truth) = ckpt.classes.iter().position(|c| *c == r.utterance.class_label(ckpt.label_mode)) else {
            unknown += 1;
            continue;
        };
        predictions.push(Prediction { fold: 0, id: r.utterance.path.clone(), truth, predicted: ckpt.model.predict_class(&r.features.values)? });
    }
    if predictions.is_empty() {
        return Err(Error::InvalidData("no utterance carries a label known to the checkpoint".into()));
    }
    let report = MetricsReport::from_predictions(ckpt.classes.clone(), &predictions)?;
    let ckpt_hash = crate::provenance::sha256_hex(&std::fs::read(checkpoint).map_err(|e| Error::io(checkpoint, e))?);
    let prov = Provenance::new("evaluate", ckpt.provenance.seed, &EvaluateArgs { checkpoint: &ckpt_hash, manifest });
    let languages: Vec<Language> = {
        let mut l: Vec<Language> = extraction.rows.iter().map(|r| r.utterance.language).collect();
        l.sort();
        l.dedup();
        l
    };
    let cell = Cell {
        meta: CellMeta {
            cell_id: "evaluate".into(),
            role: Role::Mono,
            train_languages: languages.clone(),
            test_languages: languages,
            label_mode: ckpt.label_mode,
            feature_set: ckpt.feature_set.clone(),
            classes: ckpt.classes.clone(),
            models_fitted: 0,
            folds: Vec::new(),
        },
        predictions,
        report,
    };
    write_run(&ctx.out(), std::slice::from_ref(&cell), &prov)?;
    println!("macro-F1 {:.4} on {} clips ({} with unknown labels skipped)", cell.report.mean_macro_f1, cell.predictions.len(), unknown);
    Ok(())
}

/// Attach features to utterances: from precomputed files when they cover an
/// utterance, otherwise by extraction.
fn examples_for(ctx: &Ctx, cfg: &ExperimentConfig, utterances: &[Utterance]) -> Result<(Vec<Example>, AmplitudeRow)> {
    let kinds = cfg.kinds_to_extract()?;
    let mut cached = BTreeMap::new();
    for f in &cfg.data.feature_files {
        let (layout, rows) = read_features(f)?;
        if kinds.iter().any(|k| !layout.kinds.contains(k)) {
            return Err(Error::Config(format!("{} lacks some of the requested features", f.display())));
        }
        cached.extend(rows);
    }
    let (have, missing): (Vec<&Utterance>, Vec<&Utterance>) = utterances.iter().partition(|u| cached.contains_key(&u.path));
    ctx.log(format!("{} clips from feature files, {} to extract", have.len(), missing.len()));
    let missing: Vec<Utterance> = missing.into_iter().cloned().collect();
    let extraction = if missing.is_empty() { Extraction::default() } else { extract_all(&missing, &kinds, &cfg.feature_config())? };
    extraction.check_threshold()?;
    for (p, e) in &extraction.failures {
        eprintln!("skipped {p}: {e}");
    }
    let mut amp: BTreeMap<Language, (f64, usize)> = BTreeMap::new();
    for r in &extraction.rows {
        let e = amp.entry(r.utterance.language).or_default();
        e.0 += r.amplitude;
        e.1 += 1;
    }
    let mut by_path: BTreeMap<String, Example> = extraction.examples().into_iter().map(|e| (e.utterance.path.clone(), e)).collect();
    let mut examples = Vec::with_capacity(utterances.len());
    for u in utterances {
        if let Some(v) = cached.get(&u.path) {
            let features = v.select(&kinds).ok_or_else(|| Error::InvalidData(format!("{}: incomplete cached features", u.path)))?;
            examples.push(Example { utterance: u.clone(), features });
        } else if let Some(e) = by_path.remove(&u.path) {
            examples.push(e);
        }
    }
    let amplitude = amp.into_iter().map(|(l, (s, n))| (l, s / n as f64)).collect();
    Ok((examples, amplitude))
}

#[derive(Serialize)]
struct ResolvedConfig<'a> {
    config: &'a ExperimentConfig,
    spec: &'a serkit_core::experiments::ExperimentSpec,
}

fn cmd_experiment(ctx: &Ctx, config_path: &Path) -> Result<()> {
    let mut cfg = ExperimentConfig::load(config_path)?;
    if let Some(seed) = ctx.global.seed {
        cfg.seed = seed;
    }
    if let Some(p) = ctx.global.protocol {
        cfg.protocol = format!("{p:?}").to_lowercase();
    }
    if let Some(f) = &ctx.global.features {
        cfg.features = f.split(',').map(|s| s.trim().to_string()).collect();
    }
    let spec = cfg.spec()?;
    let search = cfg.search_candidates()?;
    let restrict = cfg.restrict_to_shared()?;
    let out = ctx.out();
    let mut prov = Provenance::new("experiment", spec.seed, &ResolvedConfig { config: &cfg, spec: &spec });
    prov.complete = false;
    write_json(&out.join(PROVENANCE_FILE), &prov)?;

    let mut utterances = Vec::new();
    for m in &cfg.data.manifests {
        utterances.extend(read_manifest(m)?);
    }
    let utterances = labelled(&utterances, restrict)?;
    let (examples, amplitude) = examples_for(ctx, &cfg, &utterances)?;
    let exec = RayonExecutor;

    if let Some((candidates, max_size)) = search {
        ctx.log(format!("feature search over {} candidates, up to {max_size} per set", candidates.len()));
        let rows = run_feature_search(&spec, &examples, &spec.train_languages, &candidates, max_size, &exec)?;
        prov.complete = true;
        write_atomic(&out.join("search.csv"), render_search_csv(&rows, &prov).as_bytes())?;
        write_atomic(&out.join("search.txt"), render_search_table(&rows, &amplitude, &prov).as_bytes())?;
        write_json(&out.join("search.json"), &(&prov, &rows))?;
        write_json(&out.join(PROVENANCE_FILE), &prov)?;
        if let Some(best) = rows.first() {
            let names: Vec<&str> = best.kinds.iter().map(|k| k.id()).collect();
            println!("best feature set: {} (mean F1 {:.4})", names.join("+"), best.mean_f1);
        }
        return Ok(());
    }

    ctx.log(format!("running {} on {} clips", spec.protocol, examples.len()));
    let outcome = run_experiment(&spec, &examples, &exec)?;
    let cells = cells_from_outcome(&outcome);
    prov.complete = true;
    write_run(&out, &cells, &prov)?;
    for c in &cells {
        println!("{}: macro-F1 {:.4}", c.meta.cell_id, c.report.mean_macro_f1);
    }
    Ok(())
}

fn cmd_report(ctx: &Ctx, run_dir: &Path) -> Result<()> {
    let (prov, cells) = load_run(run_dir)?;
    let out = ctx.global.out.clone().unwrap_or_else(|| run_dir.to_path_buf());
    render_run(&out, &cells, &prov)?;
    println!("rendered {} cells into {}", cells.len(), out.display());
    Ok(())
}

fn cmd_synth(ctx: &Ctx, cfg: &SynthConfig) -> Result<()> {
    let out = ctx.out();
    let utterances = write_corpus(&out, cfg)?;
    println!("wrote {} clips and {}", utterances.len(), out.join("manifest.jsonl").display());
    Ok(())
}
