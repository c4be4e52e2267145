//! Decoding, resampling and parallel feature extraction.

use std::path::Path;

use rayon::prelude::*;
use serkit_core::audio::{mean_abs_amplitude, resample, AudioClip, CANONICAL_SAMPLE_RATE};
use serkit_core::experiments::{Example, Executor, Utterance};
use serkit_core::features::{Extractor, FeatureConfig, FeatureKind, FeatureVector};

use crate::error::{Error, Result};
use crate::wav::read_wav;

/// Runs jobs on the rayon thread pool.
#[derive(Debug, Clone, Copy, Default)]
pub struct RayonExecutor;

impl Executor for RayonExecutor {
    fn map<T, F>(&self, jobs: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..jobs).into_par_iter().map(f).collect()
    }
}

/// Read a WAV file and convert it to the canonical sample rate.
pub fn load_clip(path: &Path) -> Result<AudioClip> {
    let clip = read_wav(path)?;
    resample(&clip, CANONICAL_SAMPLE_RATE).map_err(|source| Error::Wav { path: path.to_path_buf(), source })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extracted {
    pub utterance: Utterance,
    pub features: FeatureVector,
    /// Mean absolute amplitude at the canonical rate.
    pub amplitude: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Extraction {
    pub rows: Vec<Extracted>,
    pub failures: Vec<(String, String)>,
}

impl Extraction {
    /// Fail when more than 10% of the clips could not be processed.
    pub fn check_threshold(&self) -> Result<()> {
        let total = self.rows.len() + self.failures.len();
        if self.failures.len() * 10 > total {
            return Err(Error::ExtractionThreshold { failed: self.failures.len(), total });
        }
        Ok(())
    }

    pub fn examples(&self) -> Vec<Example> {
        self.rows.iter().map(|r| Example { utterance: r.utterance.clone(), features: r.features.clone() }).collect()
    }
}

/// Extract `kinds` for every utterance in parallel. Output keeps manifest
/// order; failures are collected rather than aborting the run.
pub fn extract_all(utterances: &[Utterance], kinds: &[FeatureKind], config: &FeatureConfig) -> Result<Extraction> {
    let extractor = Extractor::new(CANONICAL_SAMPLE_RATE, config.clone())?;
    let results: Vec<std::result::Result<Extracted, String>> = utterances
        .par_iter()
        .map(|u| {
            let clip = load_clip(Path::new(&u.path)).map_err(|e| e.to_string())?;
            let features = extractor.feature_vector(&clip, kinds).map_err(|e| format!("{}: {e}", u.path))?;
            Ok(Extracted { utterance: u.clone(), features, amplitude: mean_abs_amplitude(&clip) })
        })
        .collect();
    let mut out = Extraction::default();
    for (u, r) in utterances.iter().zip(results) {
        match r {
            Ok(row) => out.rows.push(row),
            Err(e) => out.failures.push((u.path.clone(), e)),
        }
    }
    Ok(out)
}
