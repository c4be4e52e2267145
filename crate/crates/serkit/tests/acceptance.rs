//! Acceptance suite. Prints one `[PASS]`, `[FAIL]` or `[SKIP]` line per
//! criterion and exits non-zero if any criterion fails.
//!
//! Criteria 7-12 need the RAVDESS, EMO-DB and EMOVO corpora. Point
//! `SERKIT_RAVDESS`, `SERKIT_EMODB` and `SERKIT_EMOVO` at their root
//! directories to run them. `SERKIT_ACCEPTANCE=1,4,6` restricts the run to
//! the listed criteria.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serkit::checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
use serkit::manifest::{read_manifest, scan_dataset};
use serkit::pipeline::{extract_all, RayonExecutor};
use serkit::provenance::Provenance;
use serkit::synth::{write_corpus, SynthConfig};
use serkit_core::audio::AudioClip;
use serkit_core::dsp::{dct_ii_orthonormal, fft_real, power_spectrogram, Matrix, SpectrogramParams};
use serkit_core::experiments::{
    compute_metrics, map_labels, run_cross_lingual, run_feature_search, run_gender, run_mono_lingual, run_multi_lingual,
    stratified_kfold, Dataset, Emotion, Example, ExperimentSpec, GenderResult, LabelMode, LabelScheme, Language, Protocol,
};
use serkit_core::features::{aggregate, tonnetz, Extractor, FeatureConfig, FeatureKind, FeatureMatrix};
use serkit_core::model::{fit, gradient_check, init_model, softmax_cross_entropy, TrainConfig};

type Check = Result<String, String>;

#[derive(Clone, Copy, PartialEq)]
enum Status {
    Pass,
    Fail,
    Skip,
}

struct Suite {
    only: Option<Vec<u32>>,
    failed: usize,
}

impl Suite {
    fn wants(&self, id: u32) -> bool {
        self.only.as_ref().is_none_or(|v| v.contains(&id))
    }

    fn record(&mut self, id: u32, name: &str, status: Status, detail: &str, secs: f64) {
        let tag = match status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        };
        if status == Status::Fail {
            self.failed += 1;
        }
        println!("[{tag}] {id:>2} {name}: {detail} ({secs:.1}s)");
    }

    fn run(&mut self, id: u32, name: &str, f: impl FnOnce() -> Check) {
        if !self.wants(id) {
            return;
        }
        let start = Instant::now();
        let (status, detail) = match f() {
            Ok(d) => (Status::Pass, d),
            Err(d) => (Status::Fail, d),
        };
        self.record(id, name, status, &detail, start.elapsed().as_secs_f64());
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

// ---------------------------------------------------------------------------
// naive reference implementations

/// `exp(-2 pi i j / n)` for `j < n`.
fn twiddle_table(n: usize) -> Vec<(f64, f64)> {
    (0..n).map(|j| {
        let a = 2.0 * PI * j as f64 / n as f64;
        (a.cos(), -a.sin())
    })
    .collect()
}

/// Bins `0..=n/2` of the DFT by direct summation.
fn naive_dft(x: &[f64], table: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let n = x.len();
    (0..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &v) in x.iter().enumerate() {
                let (c, s) = table[(k * t) % n];
                re += v * c;
                im += v * s;
            }
            (re, im)
        })
        .collect()
}

fn periodic_hann(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()).collect()
}

/// Windowed, reflect-padded frames of `x`, one `Vec` per frame.
fn naive_frames(x: &[f64], n_fft: usize, hop: usize) -> Vec<Vec<f64>> {
    let pad = n_fft / 2;
    let len = x.len() as isize;
    let padded: Vec<f64> = (-(pad as isize)..len + pad as isize)
        .map(|i| {
            let j = if i < 0 { -i } else if i >= len { 2 * (len - 1) - i } else { i };
            x[j as usize]
        })
        .collect();
    let w = periodic_hann(n_fft);
    let n_frames = 1 + (padded.len() - n_fft) / hop;
    (0..n_frames)
        .map(|t| padded[t * hop..t * hop + n_fft].iter().zip(&w).map(|(a, b)| a * b).collect())
        .collect()
}

/// Power spectrogram as `frames x bins`.
fn naive_power(x: &[f64], n_fft: usize, hop: usize, table: &[(f64, f64)]) -> Vec<Vec<f64>> {
    naive_frames(x, n_fft, hop)
        .iter()
        .map(|f| naive_dft(f, table).into_iter().map(|(re, im)| re * re + im * im).collect())
        .collect()
}

fn naive_mel_weights(n_mels: usize, n_fft: usize, sr: f64) -> Vec<Vec<f64>> {
    let mel = |f: f64| 2595.0 * (1.0 + f / 700.0).log10();
    let hz = |m: f64| 700.0 * (10f64.powf(m / 2595.0) - 1.0);
    let top = mel(sr / 2.0);
    let pts: Vec<f64> = (0..n_mels + 2).map(|i| hz(top * i as f64 / (n_mels + 1) as f64)).collect();
    (0..n_mels)
        .map(|m| {
            (0..=n_fft / 2)
                .map(|k| {
                    let f = k as f64 * sr / n_fft as f64;
                    let up = (f - pts[m]) / (pts[m + 1] - pts[m]);
                    let down = (pts[m + 2] - f) / (pts[m + 2] - pts[m + 1]);
                    up.min(down).max(0.0)
                })
                .collect()
        })
        .collect()
}

fn naive_dct(v: &[f64], n_out: usize) -> Vec<f64> {
    let n = v.len() as f64;
    (0..n_out)
        .map(|k| {
            let s = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
            s * v.iter().enumerate().map(|(i, x)| x * (PI * k as f64 * (2 * i + 1) as f64 / (2.0 * n)).cos()).sum::<f64>()
        })
        .collect()
}

fn db(p: f64) -> f64 {
    10.0 * p.max(1e-10).log10()
}

fn naive_contrast(frame: &[f64], sr: f64, n_fft: usize, fmin: f64, n_bands: usize, alpha: f64) -> Vec<f64> {
    let band_of = |k: usize| -> usize {
        let f = k as f64 * sr / n_fft as f64;
        if f < fmin {
            0
        } else {
            ((f / fmin).log2().floor() as usize + 1).min(n_bands)
        }
    };
    let mut bands = vec![Vec::new(); n_bands + 1];
    for (k, &p) in frame.iter().enumerate() {
        bands[band_of(k)].push(p);
    }
    bands
        .into_iter()
        .map(|mut b| {
            b.sort_by(f64::total_cmp);
            let m = b.len();
            let q = ((alpha * m as f64).ceil() as usize).clamp(1, m);
            let valley = b[..q].iter().sum::<f64>() / q as f64;
            let peak = b[m - q..].iter().sum::<f64>() / q as f64;
            db(peak) - db(valley)
        })
        .collect()
}

fn synthetic_clip(seed: u64) -> AudioClip {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sr = 22_050.0;
    let n = rng.random_range(8_000..16_000);
    let partials: Vec<(f64, f64, f64)> =
        (0..rng.random_range(1..6)).map(|_| (rng.random_range(60.0..8000.0), rng.random_range(0.05..0.4), rng.random_range(0.0..2.0 * PI))).collect();
    let noise = rng.random_range(0.001..0.05);
    let x = (0..n)
        .map(|i| {
            let t = i as f64 / sr;
            partials.iter().map(|&(f, a, p)| a * (2.0 * PI * f * t + p).sin()).sum::<f64>() + noise * rng.random_range(-1.0..1.0)
        })
        .collect();
    AudioClip::from_samples_clamped(x, 22_050).expect("clip")
}

fn max_rel_diff(ours: &Matrix, reference: &[Vec<f64>], scale: impl Fn(f64) -> f64) -> f64 {
    let mut worst = 0.0f64;
    for (t, col) in reference.iter().enumerate() {
        for (r, &want) in col.iter().enumerate() {
            worst = worst.max((ours.get(r, t) - want).abs() / scale(want));
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// criteria 1-5

fn dsp_oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut fft_err = 0.0f64;
    for p in 0..=10 {
        let n = 1usize << p;
        let table = twiddle_table(n);
        for _ in 0..3 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let ours = fft_real(&x).map_err(err)?;
            let want = naive_dft(&x, &table);
            ensure(ours.len() == want.len(), || format!("size {n}: {} bins, expected {}", ours.len(), want.len()))?;
            for (a, (re, im)) in ours.iter().zip(&want) {
                fft_err = fft_err.max((a.re - re).abs()).max((a.im - im).abs());
            }
        }
    }
    ensure(fft_err < 1e-9, || format!("fft max abs error {fft_err:e}"))?;

    // Parseval on the windowed frames the spectrogram sees.
    let mut parseval = 0.0f64;
    for seed in 0..4 {
        let clip = synthetic_clip(100 + seed);
        for (n_fft, hop) in [(2048, 512), (512, 128), (256, 256)] {
            let power = power_spectrogram(&clip, &SpectrogramParams::new(n_fft, hop).map_err(err)?).map_err(err)?;
            let frames = naive_frames(&clip.samples, n_fft, hop);
            ensure(frames.len() == power.n_frames(), || format!("{} frames, expected {}", power.n_frames(), frames.len()))?;
            for (t, f) in frames.iter().enumerate() {
                let time: f64 = f.iter().map(|v| v * v).sum();
                let half = n_fft / 2;
                let freq: f64 = (0..=half)
                    .map(|k| if k == 0 || k == half { power.bins.get(k, t) } else { 2.0 * power.bins.get(k, t) })
                    .sum::<f64>()
                    / n_fft as f64;
                if time > 0.0 {
                    parseval = parseval.max((freq - time).abs() / time);
                }
            }
        }
    }
    ensure(parseval < 1e-9, || format!("Parseval relative error {parseval:e}"))?;

    let mut dct_err = 0.0f64;
    for n in [2, 8, 20, 128, 257] {
        let basis: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                dct_ii_orthonormal(&e, n)
            })
            .collect::<Result<_, _>>()
            .map_err(err)?;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = basis[i].iter().zip(&basis[j]).map(|(a, b)| a * b).sum();
                dct_err = dct_err.max((dot - f64::from(u8::from(i == j))).abs());
            }
        }
        for _ in 0..5 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
            let y = dct_ii_orthonormal(&x, n).map_err(err)?;
            let (ex, ey) = (x.iter().map(|v| v * v).sum::<f64>(), y.iter().map(|v| v * v).sum::<f64>());
            dct_err = dct_err.max((ex - ey).abs() / ex);
        }
    }
    ensure(dct_err < 1e-10, || format!("DCT orthonormality/energy error {dct_err:e}"))?;
    Ok(format!("fft {fft_err:.1e}, Parseval {parseval:.1e}, DCT {dct_err:.1e}"))
}

fn feature_oracles() -> Check {
    let cfg = FeatureConfig::default();
    let ex = Extractor::new(22_050, cfg.clone()).map_err(err)?;
    let (n_fft, hop) = (cfg.spectrogram.n_fft, cfg.spectrogram.hop);
    let table = twiddle_table(n_fft);
    let weights = naive_mel_weights(cfg.n_mels, n_fft, 22_050.0);
    let (mut e_mel, mut e_mfcc, mut e_con) = (0.0f64, 0.0f64, 0.0f64);
    for seed in 0..20 {
        let clip = synthetic_clip(seed);
        let power = naive_power(&clip.samples, n_fft, hop, &table);
        let mel: Vec<Vec<f64>> = power.iter().map(|p| weights.iter().map(|w| w.iter().zip(p).map(|(a, b)| a * b).sum()).collect()).collect();
        let mfcc: Vec<Vec<f64>> = mel.iter().map(|m| naive_dct(&m.iter().map(|&v| db(v)).collect::<Vec<_>>(), cfg.n_mfcc)).collect();
        let contrast: Vec<Vec<f64>> = power
            .iter()
            .map(|p| naive_contrast(p, 22_050.0, n_fft, cfg.contrast_fmin, cfg.contrast_bands, cfg.contrast_alpha))
            .collect();
        let got = ex.extract_many(&clip, &[FeatureKind::Mfcc, FeatureKind::Melspec, FeatureKind::Contrast]).map_err(err)?;
        ensure(got.iter().all(|m| m.n_frames() == power.len()), || format!("clip {seed}: frame count differs"))?;
        e_mfcc = e_mfcc.max(max_rel_diff(&got[0].values, &mfcc, |w| w.abs().max(1.0)));
        e_mel = e_mel.max(max_rel_diff(&got[1].values, &mel, |w| w.abs().max(1.0)));
        e_con = e_con.max(max_rel_diff(&got[2].values, &contrast, |w| w.abs().max(1.0)));
    }
    ensure(e_mfcc < 1e-6 && e_mel < 1e-6 && e_con < 1e-6, || format!("MFCC {e_mfcc:e}, mel {e_mel:e}, contrast {e_con:e}"))?;

    let tone = |f: f64, secs: f64| {
        let x = (0..(22_050.0 * secs) as usize).map(|i| 0.5 * (2.0 * PI * f * i as f64 / 22_050.0).sin()).collect();
        AudioClip::new(x, 22_050).expect("clip")
    };
    // C4 to B6: below C4 adjacent semitones can share their nearest FFT bins
    // at n_fft = 2048, so a hard bin-to-class mapping cannot separate them.
    for midi in 60..96 {
        let f = 440.0 * 2f64.powf((midi as f64 - 69.0) / 12.0);
        let chroma = aggregate(&ex.extract(&tone(f, 1.0), FeatureKind::Chroma).map_err(err)?).map_err(err)?;
        let arg = (0..12).max_by(|&a, &b| chroma[a].total_cmp(&chroma[b])).unwrap_or(0);
        ensure(arg == midi % 12, || format!("MIDI {midi} ({f:.1} Hz): chroma argmax {arg}, expected {}", midi % 12))?;
    }

    let zcr = aggregate(&ex.extract(&tone(1000.0, 1.0), FeatureKind::Zcr).map_err(err)?).map_err(err)?[0];
    ensure((zcr - 0.0907).abs() <= 0.005, || format!("ZCR of 1 kHz sine {zcr}"))?;

    let uniform = FeatureMatrix { kind: FeatureKind::Chroma, values: Matrix::from_vec(12, 3, vec![1.0; 36]) };
    let t = tonnetz(&uniform).map_err(err)?;
    let worst = t.values.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    ensure(worst < 1e-10, || format!("tonnetz of uniform chroma has |value| {worst:e}"))?;

    let mut one_hot = Matrix::zeros(12, 1);
    one_hot.set(0, 0, 1.0);
    let t = tonnetz(&FeatureMatrix { kind: FeatureKind::Chroma, values: one_hot }).map_err(err)?;
    let want = [0.0, 1.0, 0.0, 1.0, 0.0, 0.5];
    let got = t.values.column(0);
    ensure(got.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12), || format!("tonnetz of one-hot class 0 is {got:?}"))?;
    Ok(format!("20 clips: MFCC {e_mfcc:.1e}, mel {e_mel:.1e}, contrast {e_con:.1e}; 36 chroma tones; ZCR {zcr:.4}; tonnetz ok"))
}

fn combined_length() -> Check {
    let cfg = FeatureConfig::default();
    let declared = cfg.vector_len(&FeatureKind::COMBINED);
    let v = Extractor::new(22_050, cfg).map_err(err)?.feature_vector(&synthetic_clip(7), &FeatureKind::COMBINED).map_err(err)?;
    let parts: Vec<usize> = v.layout.iter().map(|e| e.length).collect();
    ensure(declared == 155 && v.len() == 155, || format!("declared {declared}, extracted {}", v.len()))?;
    Ok(format!("155 = {parts:?}"))
}

fn random_rows(n: usize, dim: usize, classes: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y: Vec<usize> = (0..n).map(|i| i % classes).collect();
    let x = y.iter().map(|&c| (0..dim).map(|d| (c as f64 + 1.0) * ((d + c) as f64 * 0.3).cos() + rng.random_range(-0.5..0.5)).collect()).collect();
    (x, y)
}

fn model_checks() -> Check {
    let mut grad = 0.0f64;
    let mut checked = 0;
    for seed in [1u64, 2, 3] {
        let model = init_model(155, 6, seed).map_err(err)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 50);
        let x: Vec<f64> = (0..155).map(|_| rng.random_range(-1.5..1.5)).collect();
        let r = gradient_check(&model, &x, (seed % 6) as usize, 1e-4).map_err(err)?;
        grad = grad.max(r.max_rel_error);
        checked += r.checked;
    }
    ensure(grad < 1e-3 && checked > 0, || format!("gradient check max relative error {grad:e} over {checked} parameters"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut ident = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(2..13);
        let scale = [1.0, 10.0, 300.0][rng.random_range(0..3)];
        let logits: Vec<f64> = (0..n).map(|_| rng.random_range(-scale..scale)).collect();
        let label = rng.random_range(0..n);
        let (_, g) = softmax_cross_entropy(&logits, label);
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = logits.iter().map(|l| (l - max).exp()).sum();
        for (i, (gi, l)) in g.iter().zip(&logits).enumerate() {
            let p = (l - max).exp() / z;
            ident = ident.max((gi - (p - f64::from(u8::from(i == label)))).abs());
        }
    }
    ensure(ident < 1e-12, || format!("logit gradient deviates from p - one_hot by {ident:e}"))?;

    let (x, y) = random_rows(40, 155, 4, 5);
    let cfg = TrainConfig { epochs: 4, seed: 21, ..TrainConfig::default() };
    let (m1, h1) = fit(init_model(155, 4, 8).map_err(err)?, &x, &y, &cfg).map_err(err)?;
    let (m2, h2) = fit(init_model(155, 4, 8).map_err(err)?, &x, &y, &cfg).map_err(err)?;
    let bits = |m: &serkit_core::CnnModel| -> Vec<u64> { m.param_tensors().iter().flat_map(|t| t.iter().map(|v| v.to_bits())).collect() };
    ensure(bits(&m1) == bits(&m2) && h1 == h2 && m1 == m2, || "two seeded fits differ".into())?;

    let dir = tempfile::tempdir().map_err(err)?;
    let path = dir.path().join("model.json");
    let ckpt = Checkpoint::new(m1.clone(), vec!["a".into(), "b".into(), "c".into(), "d".into()], FeatureKind::COMBINED.to_vec(), LabelMode::Emotion, Provenance::new("acceptance", 21, &cfg));
    save_checkpoint(&path, &ckpt).map_err(err)?;
    let back = load_checkpoint(&path).map_err(err)?;
    ensure(bits(&back.model) == bits(&m1) && back == ckpt, || "checkpoint round trip changed the model".into())?;
    for row in &x {
        let (a, b) = (m1.predict(row).map_err(err)?, back.model.predict(row).map_err(err)?);
        ensure(a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits()), || "restored model predicts differently".into())?;
    }
    Ok(format!("gradient {grad:.1e} ({checked} params), identity {ident:.1e}, determinism and checkpoint bitwise"))
}

fn harness_checks() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for trial in 0..200 {
        let classes = rng.random_range(1..8);
        let k = rng.random_range(2..8);
        let n = rng.random_range(k * classes..400);
        let mut labels: Vec<usize> = (0..classes).flat_map(|c| std::iter::repeat_n(c, k)).collect();
        labels.extend((labels.len()..n).map(|_| rng.random_range(0..classes)));
        let folds = stratified_kfold(&labels, k, trial).map_err(err)?;
        let mut seen = vec![0u32; n];
        for f in &folds {
            for &i in f {
                seen[i] += 1;
            }
        }
        ensure(folds.len() == k && seen.iter().all(|&s| s == 1), || format!("trial {trial}: folds do not partition"))?;
        for c in 0..classes {
            let counts: Vec<usize> = folds.iter().map(|f| f.iter().filter(|&&i| labels[i] == c).count()).collect();
            let (lo, hi) = (counts.iter().min().unwrap_or(&0), counts.iter().max().unwrap_or(&0));
            ensure(hi - lo <= 1, || format!("trial {trial}: class {c} fold counts {counts:?}"))?;
        }
    }

    let mut worst = 0.0f64;
    for trial in 0..20 {
        let n_classes = rng.random_range(2..10);
        let names: Vec<String> = (0..n_classes).map(|c| format!("c{c}")).collect();
        let truth: Vec<usize> = (0..1000).map(|_| rng.random_range(0..n_classes)).collect();
        let pred: Vec<usize> = truth.iter().map(|&t| if rng.random_bool(0.6) { t } else { rng.random_range(0..n_classes) }).collect();
        let m = compute_metrics(&pred, &truth, &names).map_err(err)?;
        let mut f1s = Vec::new();
        for c in 0..n_classes {
            let (mut tp, mut fp, mut fneg) = (0.0, 0.0, 0.0);
            for (p, t) in pred.iter().zip(&truth) {
                match (*p == c, *t == c) {
                    (true, true) => tp += 1.0,
                    (true, false) => fp += 1.0,
                    (false, true) => fneg += 1.0,
                    _ => {}
                }
            }
            let prec = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
            let rec = if tp + fneg > 0.0 { tp / (tp + fneg) } else { 0.0 };
            let f1 = if prec + rec > 0.0 { 2.0 * prec * rec / (prec + rec) } else { 0.0 };
            let got = &m.per_class[c];
            worst = worst.max((got.precision - prec).abs()).max((got.recall - rec).abs()).max((got.f1 - f1).abs());
            for p in 0..n_classes {
                let count = pred.iter().zip(&truth).filter(|&(&a, &b)| a == p && b == c).count();
                ensure(m.confusion[c][p] == count, || format!("trial {trial}: confusion[{c}][{p}]"))?;
            }
            if tp + fneg > 0.0 {
                f1s.push(f1);
            }
        }
        let macro_f1 = f1s.iter().sum::<f64>() / f1s.len() as f64;
        let acc = pred.iter().zip(&truth).filter(|(a, b)| a == b).count() as f64 / 1000.0;
        worst = worst.max((m.macro_f1 - macro_f1).abs()).max((m.accuracy - acc).abs());
    }
    ensure(worst < 1e-12, || format!("metrics differ from brute force by {worst:e}"))?;
    Ok(format!("200 fold splits balanced; metrics max deviation {worst:.1e}"))
}

// ---------------------------------------------------------------------------
// criterion 6

fn synthetic_end_to_end() -> Check {
    let dir = tempfile::tempdir().map_err(err)?;
    write_corpus(dir.path(), &SynthConfig { seed: 1, ..SynthConfig::default() }).map_err(err)?;
    let utterances = read_manifest(&dir.path().join("manifest.jsonl")).map_err(err)?;
    let extraction = extract_all(&utterances, &FeatureKind::COMBINED, &FeatureConfig::default()).map_err(err)?;
    ensure(extraction.failures.is_empty(), || format!("{} clips failed extraction", extraction.failures.len()))?;
    let examples = extraction.examples();
    let exec = RayonExecutor;
    let (a, b) = (Language::SyntheticA, Language::SyntheticB);
    let spec = |p: Protocol, train: Language, test: Language| ExperimentSpec { seed: 7, ..ExperimentSpec::new(p, vec![train], vec![test]) };

    let mono_a = run_mono_lingual(&spec(Protocol::Mono, a, a), &examples, &exec).map_err(err)?.report.mean_macro_f1;
    let gender = run_gender(&spec(Protocol::Gender, b, b), &examples, &exec).map_err(err)?;
    let mono_b = gender.baseline.report.mean_macro_f1;
    let compound = gender.compound.report.mean_macro_f1;
    let chance = 1.0 / gender.compound.classes.len() as f64;
    let multi = |train, test| -> Result<f64, String> {
        let r = run_multi_lingual(&spec(Protocol::Multi, train, test), &examples, &exec).map_err(err)?;
        Ok(r.results[0].report.mean_macro_f1)
    };
    let (ab, ba) = (multi(a, b)?, multi(b, a)?);
    let detail = format!(
        "mono A {mono_a:.3}, mono B {mono_b:.3}; multi A->B {ab:.3}, B->A {ba:.3}; gender compound {compound:.3} vs chance {chance:.3}"
    );
    ensure(mono_a >= 0.9 && mono_b >= 0.9, || format!("mono below 0.9: {detail}"))?;
    let lowest_mono = mono_a.min(mono_b);
    ensure(ab < lowest_mono && ba < lowest_mono, || format!("multi not below mono: {detail}"))?;
    ensure(compound > 3.0 * chance, || format!("gender compound not above 3x chance: {detail}"))?;
    Ok(detail)
}

// ---------------------------------------------------------------------------
// criteria 7-12

const CORPORA: [(Dataset, &str); 3] = [(Dataset::Ravdess, "SERKIT_RAVDESS"), (Dataset::Emodb, "SERKIT_EMODB"), (Dataset::Emovo, "SERKIT_EMOVO")];
const LANGS: [Language; 3] = [Language::English, Language::German, Language::Italian];

fn corpus_roots() -> Result<Vec<(Dataset, PathBuf)>, String> {
    let mut out = Vec::new();
    let mut missing = Vec::new();
    for (d, var) in CORPORA {
        match std::env::var_os(var).map(PathBuf::from) {
            Some(p) if p.is_dir() => out.push((d, p)),
            _ => missing.push(var),
        }
    }
    if missing.is_empty() {
        Ok(out)
    } else {
        Err(format!("set {} to the corpus root", missing.join(", ")))
    }
}

struct Corpora {
    examples: Vec<Example>,
    amplitude: BTreeMap<Language, f64>,
}

fn load_corpora(roots: &[(Dataset, PathBuf)], kinds: &[FeatureKind]) -> Result<Corpora, String> {
    let mut all = Vec::new();
    for (d, root) in roots {
        all.extend(scan_dataset(root, *d).map_err(err)?.utterances);
    }
    let extraction = extract_all(&all, kinds, &FeatureConfig::default()).map_err(err)?;
    extraction.check_threshold().map_err(err)?;
    let mut amp: BTreeMap<Language, (f64, usize)> = BTreeMap::new();
    for r in &extraction.rows {
        let e = amp.entry(r.utterance.language).or_default();
        e.0 += r.amplitude;
        e.1 += 1;
    }
    let shared: HashMap<String, _> = map_labels(&all, LabelScheme, true).map_err(err)?.into_iter().map(|u| (u.path.clone(), u)).collect();
    let examples = extraction
        .examples()
        .into_iter()
        .filter_map(|e| shared.get(&e.utterance.path).map(|u| Example { utterance: u.clone(), features: e.features }))
        .collect();
    Ok(Corpora { examples, amplitude: amp.into_iter().map(|(l, (s, n))| (l, s / n as f64)).collect() })
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn table2_ordering(c: &Corpora, singles: &[FeatureKind]) -> Check {
    let base = ExperimentSpec::new(Protocol::Mono, vec![Language::English], vec![Language::English]);
    let rows = run_feature_search(&base, &c.examples, &LANGS, singles, 1, &RayonExecutor).map_err(err)?;
    let order: Vec<String> = rows.iter().map(|r| format!("{}={:.2}", r.kinds[0].id(), r.mean_f1)).collect();
    let detail = order.join(" > ");
    let top: Vec<FeatureKind> = rows.iter().take(3).map(|r| r.kinds[0]).collect();
    ensure(top == [FeatureKind::Mfcc, FeatureKind::Melspec, FeatureKind::Contrast], || format!("top three differ: {detail}"))?;
    let mfcc = rows[0].mean_f1;
    ensure(within(mfcc, 0.70, 0.08), || format!("MFCC mean {mfcc:.3} outside 0.70 +- 0.08: {detail}"))?;
    Ok(detail)
}

fn table3_mono(c: &Corpora) -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for (lang, want) in LANGS.into_iter().zip([0.70, 0.76, 0.78]) {
        let f1 = run_mono_lingual(&ExperimentSpec::new(Protocol::Mono, vec![lang], vec![lang]), &c.examples, &RayonExecutor)
            .map_err(err)?
            .report
            .mean_macro_f1;
        ok &= within(f1, want, 0.08);
        parts.push(format!("{} {f1:.3} (target {want:.2})", lang.id()));
    }
    ensure(ok, || parts.join(", "))?;
    Ok(parts.join(", "))
}

fn table3_multi(c: &Corpora) -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for train in LANGS {
        let tests: Vec<Language> = LANGS.into_iter().filter(|&l| l != train).collect();
        let r = run_multi_lingual(&ExperimentSpec::new(Protocol::Multi, vec![train], tests), &c.examples, &RayonExecutor).map_err(err)?;
        for cell in &r.results {
            let f1 = cell.report.mean_macro_f1;
            ok &= f1 < 0.35;
            parts.push(format!("{}->{} {f1:.3}", train.id(), cell.test_languages[0].id()));
        }
    }
    ensure(ok, || format!("off-diagonal cell at or above 0.35: {}", parts.join(", ")))?;
    Ok(parts.join(", "))
}

fn table3_cross(c: &Corpora) -> Check {
    let r = run_cross_lingual(&ExperimentSpec::new(Protocol::Cross, LANGS.to_vec(), LANGS.to_vec()), &c.examples, &RayonExecutor).map_err(err)?;
    let f1 = r.report.mean_macro_f1;
    ensure(within(f1, 0.66, 0.10), || format!("cross-lingual F1 {f1:.3} outside 0.66 +- 0.10"))?;
    Ok(format!("cross-lingual F1 {f1:.3}"))
}

fn table2_amplitude(c: &Corpora) -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for (lang, want) in LANGS.into_iter().zip([0.07, 0.62, 0.17]) {
        let a = c.amplitude.get(&lang).copied().unwrap_or(f64::NAN);
        ok &= within(a, want, 0.02);
        parts.push(format!("{} {a:.4} (target {want:.2})", lang.id()));
    }
    ensure(ok, || parts.join(", "))?;
    Ok(parts.join(", "))
}

fn gender_f1(r: &GenderResult, e: Emotion) -> Result<(f64, f64), String> {
    let row = r.rows.iter().find(|row| row.emotion == e).ok_or_else(|| format!("{} has no {} row", r.language.id(), e.label()))?;
    match (row.male_f1, row.female_f1) {
        (Some(m), Some(f)) => Ok((m, f)),
        _ => Err(format!("{} {} lacks a male or female class", r.language.id(), e.label())),
    }
}

fn table4_direction(c: &Corpora) -> Check {
    let mut runs = BTreeMap::new();
    for lang in LANGS {
        let r = run_gender(&ExperimentSpec::new(Protocol::Gender, vec![lang], vec![lang]), &c.examples, &RayonExecutor).map_err(err)?;
        runs.insert(lang, r);
    }
    let (m_anger, f_anger) = gender_f1(&runs[&Language::German], Emotion::Anger)?;
    let mut parts = vec![format!("german anger M {m_anger:.2} F {f_anger:.2}")];
    let mut ok = m_anger > f_anger;
    for lang in [Language::English, Language::Italian] {
        let (m, f) = gender_f1(&runs[&lang], Emotion::Fear)?;
        ok &= f >= m;
        parts.push(format!("{} fear M {m:.2} F {f:.2}", lang.id()));
    }
    ensure(ok, || parts.join(", "))?;
    Ok(parts.join(", "))
}

fn dataset_criteria(suite: &mut Suite) {
    const NAMES: [(u32, &str); 6] = [
        (7, "single-feature ordering"),
        (8, "mono-lingual F1"),
        (9, "multi-lingual degradation"),
        (10, "cross-lingual F1"),
        (11, "mean absolute amplitude"),
        (12, "gender direction"),
    ];
    if !NAMES.iter().any(|(id, _)| suite.wants(*id)) {
        return;
    }
    let roots = match corpus_roots() {
        Ok(r) => r,
        Err(why) => {
            for (id, name) in NAMES {
                if suite.wants(id) {
                    suite.record(id, name, Status::Skip, &why, 0.0);
                }
            }
            return;
        }
    };
    let singles = [
        FeatureKind::Mfcc,
        FeatureKind::Melspec,
        FeatureKind::Contrast,
        FeatureKind::Cens,
        FeatureKind::Stft,
        FeatureKind::Zcr,
        FeatureKind::Tonnetz,
    ];
    let start = Instant::now();
    let corpora = match load_corpora(&roots, &singles) {
        Ok(c) => c,
        Err(e) => {
            for (id, name) in NAMES {
                if suite.wants(id) {
                    suite.record(id, name, Status::Fail, &format!("loading corpora: {e}"), start.elapsed().as_secs_f64());
                }
            }
            return;
        }
    };
    suite.run(7, NAMES[0].1, || table2_ordering(&corpora, &singles));
    suite.run(8, NAMES[1].1, || table3_mono(&corpora));
    suite.run(9, NAMES[2].1, || table3_multi(&corpora));
    suite.run(10, NAMES[3].1, || table3_cross(&corpora));
    suite.run(11, NAMES[4].1, || table2_amplitude(&corpora));
    suite.run(12, NAMES[5].1, || table4_direction(&corpora));
}

fn main() {
    let only = std::env::var("SERKIT_ACCEPTANCE")
        .ok()
        .map(|s| s.split(',').filter_map(|p| p.trim().parse().ok()).collect::<Vec<u32>>());
    let mut suite = Suite { only, failed: 0 };
    suite.run(1, "DSP oracles", dsp_oracles);
    suite.run(2, "feature oracles", feature_oracles);
    suite.run(3, "combined vector length", combined_length);
    suite.run(4, "model checks", model_checks);
    suite.run(5, "folds and metrics", harness_checks);
    suite.run(6, "synthetic end-to-end", synthetic_end_to_end);
    dataset_criteria(&mut suite);
    if suite.failed > 0 {
        println!("{} acceptance criteria failed", suite.failed);
        std::process::exit(1);
    }
}
