//! Synthetic emotional-speech stand-in for dataset-free runs.
//!
//! Each clip is a harmonic tone shaped by a language-specific formant
//! envelope. Emotions differ in fundamental frequency band, amplitude
//! modulation rate and noise floor; genders shift the pitch by four semitones
//! down (male) or up (female).

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serkit_core::audio::AudioClip;
use serkit_core::experiments::{parse_synthetic, synthetic_filename, Emotion, Gender, Language, Utterance};
use serkit_core::seed::derive_seed;

use crate::error::{Error, Result};
use crate::manifest::write_manifest;
use crate::wav::write_wav;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmotionVoice {
    pub f0_hz: f64,
    pub am_rate_hz: f64,
    pub noise_floor: f64,
}

pub fn emotion_voice(e: Emotion) -> EmotionVoice {
    let (f0_hz, am_rate_hz, noise_floor) = match e {
        Emotion::Anger => (230.0, 7.0, 0.08),
        Emotion::Fear => (310.0, 11.0, 0.03),
        Emotion::Joy => (270.0, 4.5, 0.015),
        Emotion::Sadness => (150.0, 1.5, 0.004),
        Emotion::Disgust => (190.0, 3.0, 0.05),
        _ => (170.0, 0.0, 0.008),
    };
    EmotionVoice { f0_hz, am_rate_hz, noise_floor }
}

/// Formant centres and bandwidths in Hz, plus the spectral tilt exponent.
fn language_profile(l: Language) -> ([(f64, f64); 3], f64) {
    match l {
        Language::SyntheticB => ([(780.0, 90.0), (1150.0, 110.0), (2900.0, 200.0)], 0.6),
        _ => ([(500.0, 120.0), (1500.0, 150.0), (2500.0, 180.0)], 1.0),
    }
}

fn envelope(l: Language, f: f64) -> f64 {
    let (formants, _) = language_profile(l);
    0.05 + formants.iter().map(|&(c, bw)| 1.0 / (1.0 + ((f - c) / bw).powi(2))).sum::<f64>()
}

pub const GENDER_SEMITONES: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub languages: Vec<Language>,
    pub emotions: Vec<Emotion>,
    /// Clips per (language, gender, emotion) cell.
    pub takes: usize,
    pub sample_rate: u32,
    pub duration_secs: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            languages: vec![Language::SyntheticA, Language::SyntheticB],
            emotions: Emotion::SHARED.to_vec(),
            takes: 6,
            sample_rate: 22_050,
            duration_secs: 1.0,
        }
    }
}

/// Render one clip. Deterministic in `(seed, language, gender, emotion, take)`.
pub fn synthesize(cfg: &SynthConfig, language: Language, gender: Gender, emotion: Emotion, take: usize) -> AudioClip {
    let name = synthetic_filename(language, gender, emotion, take);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &name, 0));
    let voice = emotion_voice(emotion);
    let sr = cfg.sample_rate as f64;
    let semitones = if gender == Gender::Male { -GENDER_SEMITONES } else { GENDER_SEMITONES };
    let f0 = voice.f0_hz * 2f64.powf(semitones / 12.0) * rng.random_range(0.97..1.03);
    let am_rate = voice.am_rate_hz * rng.random_range(0.9..1.1);
    let am_phase = rng.random_range(0.0..2.0 * PI);
    let duration = cfg.duration_secs * rng.random_range(0.9..1.1);
    let n = (duration * sr).round().max(1.0) as usize;
    let (_, tilt) = language_profile(language);

    let harmonics: Vec<(f64, f64, f64)> = (1..)
        .map(|h| h as f64 * f0)
        .take_while(|&f| f < 5000.0_f64.min(sr / 2.0))
        .enumerate()
        .map(|(i, f)| (f, envelope(language, f) / ((i + 1) as f64).powf(tilt), rng.random_range(0.0..2.0 * PI)))
        .collect();
    let mut tone: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / sr;
            let am = if am_rate > 0.0 { 1.0 + 0.6 * (2.0 * PI * am_rate * t + am_phase).sin() } else { 1.0 };
            am * harmonics.iter().map(|&(f, a, ph)| a * (2.0 * PI * f * t + ph).sin()).sum::<f64>()
        })
        .collect();
    let peak = tone.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
    let fade = ((0.01 * sr) as usize).min(n / 2).max(1);
    for (i, v) in tone.iter_mut().enumerate() {
        let edge = i.min(n - 1 - i);
        let gain = if edge < fade { edge as f64 / fade as f64 } else { 1.0 };
        *v = 0.5 * *v / peak * gain + voice.noise_floor * rng.random_range(-1.0..1.0) * 3f64.sqrt();
    }
    AudioClip::from_samples_clamped(tone, cfg.sample_rate).expect("non-empty clip").with_source(name)
}

/// Every (language, gender, emotion, take) combination in a fixed order.
pub fn corpus_plan(cfg: &SynthConfig) -> Vec<(Language, Gender, Emotion, usize)> {
    let mut plan = Vec::new();
    for &l in &cfg.languages {
        for g in Gender::ALL {
            for &e in &cfg.emotions {
                for take in 0..cfg.takes {
                    plan.push((l, g, e, take));
                }
            }
        }
    }
    plan
}

/// Write the corpus as 16-bit WAV files under `out/<language>/` plus
/// `out/manifest.jsonl` with paths relative to `out`.
pub fn write_corpus(out: &Path, cfg: &SynthConfig) -> Result<Vec<Utterance>> {
    for l in &cfg.languages {
        if !matches!(l, Language::SyntheticA | Language::SyntheticB) {
            return Err(Error::Config(format!("synthetic corpus languages are synthetic_a and synthetic_b, got {l}")));
        }
    }
    let plan = corpus_plan(cfg);
    let rendered: Vec<Result<Utterance>> = {
        use rayon::prelude::*;
        plan.par_iter()
            .map(|&(l, g, e, take)| {
                let clip = synthesize(cfg, l, g, e, take);
                let rel = format!("{}/{}", l.id(), synthetic_filename(l, g, e, take));
                write_wav(&out.join(&rel), &clip)?;
                parse_synthetic(&rel).map_err(|r| Error::InvalidData(r.to_string()))
            })
            .collect()
    };
    let utterances = rendered.into_iter().collect::<Result<Vec<_>>>()?;
    write_manifest(&out.join("manifest.jsonl"), &utterances)?;
    Ok(utterances)
}
