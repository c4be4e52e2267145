//! Spectral features and their aggregation into fixed-length vectors.
//!
//! Every feature is a [`FeatureMatrix`] with one row per feature dimension and
//! one column per analysis frame. [`aggregate`] collapses the time axis by
//! taking the mean, and [`FeatureVector`] concatenates several aggregated
//! features while recording where each one lives.

mod chroma;
mod contrast;
mod mel;
mod zcr;

pub use chroma::{cens, chroma_from_power, chromagram, pitch_class, tonnetz};
pub use contrast::{contrast_band_edges, contrast_from_power, spectral_contrast};
pub use mel::{hz_to_mel, mel_filterbank, mel_to_hz, melspec_from_power, melspectrogram, mfcc, mfcc_from_melspec, MelFilterbank};
pub use zcr::zcr;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio::AudioClip;
use crate::dsp::{power_spectrogram, Dct2, DspError, Matrix, PowerSpectrogram, SpectrogramParams};

/// Floor applied before every logarithm.
pub const LOG_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error("invalid frequency range: {0}")]
    InvalidRange(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("contrast band out of range: {0}")]
    BandOutOfRange(String),
    #[error("feature set must be non-empty with distinct kinds")]
    InvalidFeatureSet,
    #[error("feature matrix has no frames")]
    NoFrames,
    #[error("unknown feature kind `{0}`")]
    UnknownKind(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Mfcc,
    Melspec,
    Contrast,
    Chroma,
    Cens,
    Zcr,
    Tonnetz,
    Stft,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 8] = [
        FeatureKind::Mfcc,
        FeatureKind::Melspec,
        FeatureKind::Contrast,
        FeatureKind::Chroma,
        FeatureKind::Cens,
        FeatureKind::Zcr,
        FeatureKind::Tonnetz,
        FeatureKind::Stft,
    ];

    /// The best-performing combination: 20 + 128 + 7 = 155 values.
    pub const COMBINED: [FeatureKind; 3] = [FeatureKind::Mfcc, FeatureKind::Melspec, FeatureKind::Contrast];

    /// Short identifier used on the command line and in files.
    pub fn id(self) -> &'static str {
        match self {
            FeatureKind::Mfcc => "mfcc",
            FeatureKind::Melspec => "mel",
            FeatureKind::Contrast => "contrast",
            FeatureKind::Chroma => "chroma",
            FeatureKind::Cens => "cens",
            FeatureKind::Zcr => "zcr",
            FeatureKind::Tonnetz => "tonnetz",
            FeatureKind::Stft => "stft",
        }
    }

    /// Human-readable name for report tables.
    pub fn label(self) -> &'static str {
        match self {
            FeatureKind::Mfcc => "MFCC",
            FeatureKind::Melspec => "Melspectrogram",
            FeatureKind::Contrast => "Spectral Contrast",
            FeatureKind::Chroma => "Chromagram",
            FeatureKind::Cens => "CENS",
            FeatureKind::Zcr => "ZCR",
            FeatureKind::Tonnetz => "Tonnetz",
            FeatureKind::Stft => "STFT",
        }
    }

    /// Parse a comma-separated list such as `mfcc,mel,contrast`.
    pub fn parse_list(s: &str) -> Result<Vec<FeatureKind>, FeatureError> {
        let kinds = s
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(FeatureKind::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        validate_set(&kinds)?;
        Ok(kinds)
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for FeatureKind {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "mfcc" => FeatureKind::Mfcc,
            "mel" | "melspec" | "melspectrogram" => FeatureKind::Melspec,
            "contrast" | "spectral_contrast" => FeatureKind::Contrast,
            "chroma" | "chromagram" => FeatureKind::Chroma,
            "cens" => FeatureKind::Cens,
            "zcr" => FeatureKind::Zcr,
            "tonnetz" => FeatureKind::Tonnetz,
            "stft" => FeatureKind::Stft,
            _ => return Err(FeatureError::UnknownKind(s.into())),
        })
    }
}

pub fn validate_set(kinds: &[FeatureKind]) -> Result<(), FeatureError> {
    if kinds.is_empty() {
        return Err(FeatureError::InvalidFeatureSet);
    }
    for (i, k) in kinds.iter().enumerate() {
        if kinds[..i].contains(k) {
            return Err(FeatureError::InvalidFeatureSet);
        }
    }
    Ok(())
}

/// Per-frame feature values, `rows x n_frames`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub kind: FeatureKind,
    pub values: Matrix,
}

impl FeatureMatrix {
    pub fn rows(&self) -> usize {
        self.values.rows()
    }

    pub fn n_frames(&self) -> usize {
        self.values.cols()
    }
}

/// Mean over the time axis.
pub fn aggregate(fm: &FeatureMatrix) -> Result<Vec<f64>, FeatureError> {
    let n = fm.n_frames();
    if n == 0 {
        return Err(FeatureError::NoFrames);
    }
    Ok((0..fm.rows())
        .map(|r| fm.values.row(r).iter().sum::<f64>() / n as f64)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutEntry {
    pub kind: FeatureKind,
    pub offset: usize,
    pub length: usize,
}

/// Concatenated aggregated features with their layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub layout: Vec<LayoutEntry>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn kinds(&self) -> Vec<FeatureKind> {
        self.layout.iter().map(|e| e.kind).collect()
    }

    pub fn slice(&self, kind: FeatureKind) -> Option<&[f64]> {
        self.layout
            .iter()
            .find(|e| e.kind == kind)
            .map(|e| &self.values[e.offset..e.offset + e.length])
    }

    /// Re-assemble a vector for `kinds` (in that order) from the parts of this one.
    pub fn select(&self, kinds: &[FeatureKind]) -> Option<FeatureVector> {
        let mut parts = Vec::with_capacity(kinds.len());
        for &k in kinds {
            parts.push((k, self.slice(k)?.to_vec()));
        }
        Some(FeatureVector::from_parts(parts))
    }

    pub fn from_parts(parts: impl IntoIterator<Item = (FeatureKind, Vec<f64>)>) -> Self {
        let mut values = Vec::new();
        let mut layout = Vec::new();
        for (kind, part) in parts {
            layout.push(LayoutEntry { kind, offset: values.len(), length: part.len() });
            values.extend(part);
        }
        Self { values, layout }
    }
}

/// Parameters for every feature. Defaults give the dimensions
/// MFCC=20, mel=128, contrast=7, chroma=12, CENS=12, ZCR=1, tonnetz=6, STFT=1025.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub spectrogram: SpectrogramParams,
    pub n_mels: usize,
    pub n_mfcc: usize,
    pub mel_fmin: f64,
    /// `None` means the Nyquist frequency.
    pub mel_fmax: Option<f64>,
    pub contrast_fmin: f64,
    pub contrast_bands: usize,
    pub contrast_alpha: f64,
    pub cens_smooth: usize,
    pub cens_downsample: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            spectrogram: SpectrogramParams::default(),
            n_mels: 128,
            n_mfcc: 20,
            mel_fmin: 0.0,
            mel_fmax: None,
            contrast_fmin: 200.0,
            contrast_bands: 6,
            contrast_alpha: 0.02,
            cens_smooth: 41,
            cens_downsample: 10,
        }
    }
}

impl FeatureConfig {
    pub fn dims(&self, kind: FeatureKind) -> usize {
        match kind {
            FeatureKind::Mfcc => self.n_mfcc,
            FeatureKind::Melspec => self.n_mels,
            FeatureKind::Contrast => self.contrast_bands + 1,
            FeatureKind::Chroma | FeatureKind::Cens => 12,
            FeatureKind::Zcr => 1,
            FeatureKind::Tonnetz => 6,
            FeatureKind::Stft => self.spectrogram.n_bins(),
        }
    }

    pub fn vector_len(&self, kinds: &[FeatureKind]) -> usize {
        kinds.iter().map(|&k| self.dims(k)).sum()
    }
}

/// Feature extractor for one sample rate, holding the prebuilt filterbank
/// and DCT basis.
#[derive(Debug, Clone)]
pub struct Extractor {
    config: FeatureConfig,
    sample_rate: u32,
    bank: MelFilterbank,
    dct: Dct2,
}

impl Extractor {
    pub fn new(sample_rate: u32, config: FeatureConfig) -> Result<Self, FeatureError> {
        config.spectrogram.validate()?;
        let fmax = config.mel_fmax.unwrap_or(sample_rate as f64 / 2.0);
        let bank = mel_filterbank(config.n_mels, config.spectrogram.n_fft, sample_rate, config.mel_fmin, fmax)?;
        let dct = Dct2::new(config.n_mels, config.n_mfcc)?;
        contrast_band_edges(sample_rate, config.spectrogram.n_fft, config.contrast_fmin, config.contrast_bands)?;
        Ok(Self { config, sample_rate, bank, dct })
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn filterbank(&self) -> &MelFilterbank {
        &self.bank
    }

    fn check_rate(&self, clip: &AudioClip) -> Result<(), FeatureError> {
        if clip.sample_rate != self.sample_rate {
            return Err(FeatureError::DimensionMismatch(alloc::format!(
                "clip sample rate {} differs from extractor rate {}",
                clip.sample_rate,
                self.sample_rate
            )));
        }
        Ok(())
    }

    /// Extract several features, computing the power spectrogram once.
    pub fn extract_many(&self, clip: &AudioClip, kinds: &[FeatureKind]) -> Result<Vec<FeatureMatrix>, FeatureError> {
        self.check_rate(clip)?;
        let needs_power = kinds.iter().any(|k| *k != FeatureKind::Zcr);
        let power = if needs_power { Some(power_spectrogram(clip, &self.config.spectrogram)?) } else { None };
        let mut chroma_cache: Option<FeatureMatrix> = None;
        let mut out = Vec::with_capacity(kinds.len());
        for &kind in kinds {
            let fm = match kind {
                FeatureKind::Zcr => {
                    let p = &self.config.spectrogram;
                    zcr(clip, p.n_fft, p.hop)?
                }
                other => {
                    let power = power.as_ref().expect("power spectrogram computed");
                    self.extract_from_power(other, power, &mut chroma_cache)?
                }
            };
            out.push(fm);
        }
        Ok(out)
    }

    fn extract_from_power(
        &self,
        kind: FeatureKind,
        power: &PowerSpectrogram,
        chroma_cache: &mut Option<FeatureMatrix>,
    ) -> Result<FeatureMatrix, FeatureError> {
        let c = &self.config;
        let mut chroma = || -> FeatureMatrix {
            chroma_cache.get_or_insert_with(|| chroma_from_power(power)).clone()
        };
        Ok(match kind {
            FeatureKind::Melspec => melspec_from_power(power, &self.bank)?,
            FeatureKind::Mfcc => mfcc_from_melspec(&melspec_from_power(power, &self.bank)?, &self.dct),
            FeatureKind::Contrast => contrast_from_power(power, c.contrast_fmin, c.contrast_bands, c.contrast_alpha)?,
            FeatureKind::Chroma => chroma(),
            FeatureKind::Cens => cens(&chroma(), c.cens_smooth, c.cens_downsample)?,
            FeatureKind::Tonnetz => tonnetz(&chroma())?,
            FeatureKind::Stft => FeatureMatrix { kind: FeatureKind::Stft, values: power.bins.map(libm::sqrt) },
            FeatureKind::Zcr => unreachable!("zcr is computed from samples"),
        })
    }

    pub fn extract(&self, clip: &AudioClip, kind: FeatureKind) -> Result<FeatureMatrix, FeatureError> {
        Ok(self.extract_many(clip, &[kind])?.remove(0))
    }

    pub fn feature_vector(&self, clip: &AudioClip, kinds: &[FeatureKind]) -> Result<FeatureVector, FeatureError> {
        validate_set(kinds)?;
        let matrices = self.extract_many(clip, kinds)?;
        let parts = matrices
            .iter()
            .map(|fm| Ok((fm.kind, aggregate(fm)?)))
            .collect::<Result<Vec<_>, FeatureError>>()?;
        Ok(FeatureVector::from_parts(parts))
    }
}

/// STFT magnitude, `sqrt` of the power spectrogram.
pub fn stft_feature(clip: &AudioClip, params: &SpectrogramParams) -> Result<FeatureMatrix, FeatureError> {
    let power = power_spectrogram(clip, params)?;
    Ok(FeatureMatrix { kind: FeatureKind::Stft, values: power.bins.map(libm::sqrt) })
}

/// Aggregated feature vector with default parameters at the clip's own rate.
pub fn feature_vector(clip: &AudioClip, kinds: &[FeatureKind]) -> Result<FeatureVector, FeatureError> {
    Extractor::new(clip.sample_rate, FeatureConfig::default())?.feature_vector(clip, kinds)
}
