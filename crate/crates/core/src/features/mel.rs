use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{FeatureError, FeatureKind, FeatureMatrix, LOG_FLOOR};
use crate::audio::AudioClip;
use crate::dsp::{power_spectrogram, Dct2, Matrix, PowerSpectrogram, SpectrogramParams};

/// HTK mel scale.
pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * libm::log10(1.0 + hz / 700.0)
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (libm::pow(10.0, mel / 2595.0) - 1.0)
}

/// Triangular filters with unit peak on the HTK mel scale.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    /// `n_mels x (n_fft/2 + 1)`.
    pub weights: Matrix,
    pub centers_hz: Vec<f64>,
    pub fmin: f64,
    pub fmax: f64,
    pub n_fft: usize,
    pub sample_rate: u32,
    /// Half-open range of non-zero bins per filter.
    support: Vec<(usize, usize)>,
}

impl MelFilterbank {
    pub fn n_mels(&self) -> usize {
        self.weights.rows()
    }

    pub fn n_bins(&self) -> usize {
        self.weights.cols()
    }

    pub fn support(&self, band: usize) -> (usize, usize) {
        self.support[band]
    }
}

pub fn mel_filterbank(n_mels: usize, n_fft: usize, sr: u32, fmin: f64, fmax: f64) -> Result<MelFilterbank, FeatureError> {
    let nyquist = sr as f64 / 2.0;
    if !(fmin >= 0.0 && fmin < fmax && fmax <= nyquist) {
        return Err(FeatureError::InvalidRange(format!(
            "need 0 <= fmin < fmax <= {nyquist}, got fmin={fmin} fmax={fmax}"
        )));
    }
    if n_mels < 2 {
        return Err(FeatureError::InvalidRange(format!("need at least 2 mel bands, got {n_mels}")));
    }
    if n_fft < 2 {
        return Err(FeatureError::InvalidRange(format!("n_fft must be at least 2, got {n_fft}")));
    }
    let n_bins = n_fft / 2 + 1;
    let (mel_lo, mel_hi) = (hz_to_mel(fmin), hz_to_mel(fmax));
    let corners: Vec<f64> = (0..n_mels + 2)
        .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (n_mels + 1) as f64))
        .collect();
    let bin_hz = sr as f64 / n_fft as f64;

    let mut weights = Matrix::zeros(n_mels, n_bins);
    let mut support = vec![(0, 0); n_mels];
    for m in 0..n_mels {
        let (lo, center, hi) = (corners[m], corners[m + 1], corners[m + 2]);
        let mut first = None;
        let mut last = 0;
        for k in 0..n_bins {
            let f = k as f64 * bin_hz;
            let rising = (f - lo) / (center - lo);
            let falling = (hi - f) / (hi - center);
            let w = rising.min(falling).max(0.0);
            if w > 0.0 {
                weights.set(m, k, w);
                first.get_or_insert(k);
                last = k + 1;
            }
        }
        support[m] = (first.unwrap_or(0), last);
    }
    Ok(MelFilterbank {
        weights,
        centers_hz: corners[1..=n_mels].to_vec(),
        fmin,
        fmax,
        n_fft,
        sample_rate: sr,
        support,
    })
}

pub fn melspec_from_power(power: &PowerSpectrogram, bank: &MelFilterbank) -> Result<FeatureMatrix, FeatureError> {
    if bank.n_bins() != power.n_bins() || bank.n_fft != power.params.n_fft {
        return Err(FeatureError::DimensionMismatch(format!(
            "filterbank built for n_fft={} but spectrogram has n_fft={}",
            bank.n_fft, power.params.n_fft
        )));
    }
    let n_frames = power.n_frames();
    let mut out = Matrix::zeros(bank.n_mels(), n_frames);
    for m in 0..bank.n_mels() {
        let (first, last) = bank.support[m];
        let w = bank.weights.row(m);
        let dst = out.row_mut(m);
        for (k, &wk) in w.iter().enumerate().take(last).skip(first) {
            for (d, p) in dst.iter_mut().zip(power.bins.row(k)) {
                *d += wk * p;
            }
        }
    }
    Ok(FeatureMatrix { kind: FeatureKind::Melspec, values: out })
}

pub fn melspectrogram(clip: &AudioClip, params: &SpectrogramParams, bank: &MelFilterbank) -> Result<FeatureMatrix, FeatureError> {
    if bank.sample_rate != clip.sample_rate {
        return Err(FeatureError::DimensionMismatch(format!(
            "filterbank built for {} Hz, clip is {} Hz",
            bank.sample_rate, clip.sample_rate
        )));
    }
    melspec_from_power(&power_spectrogram(clip, params)?, bank)
}

/// Per frame: orthonormal DCT-II of `10 log10(max(mel, 1e-10))`.
pub fn mfcc_from_melspec(mel: &FeatureMatrix, dct: &Dct2) -> FeatureMatrix {
    let n_frames = mel.n_frames();
    let mut out = Matrix::zeros(dct.output_len(), n_frames);
    let mut column = vec![0.0; mel.rows()];
    let mut coeffs = vec![0.0; dct.output_len()];
    for t in 0..n_frames {
        for (r, c) in column.iter_mut().enumerate() {
            *c = 10.0 * libm::log10(mel.values.get(r, t).max(LOG_FLOOR));
        }
        dct.transform_into(&column, &mut coeffs);
        out.set_column(t, &coeffs);
    }
    FeatureMatrix { kind: FeatureKind::Mfcc, values: out }
}

pub fn mfcc(clip: &AudioClip, params: &SpectrogramParams, bank: &MelFilterbank, n_mfcc: usize) -> Result<FeatureMatrix, FeatureError> {
    if n_mfcc > bank.n_mels() {
        return Err(FeatureError::DimensionMismatch(format!(
            "n_mfcc={n_mfcc} exceeds n_mels={}",
            bank.n_mels()
        )));
    }
    let dct = Dct2::new(bank.n_mels(), n_mfcc)?;
    Ok(mfcc_from_melspec(&melspectrogram(clip, params, bank)?, &dct))
}
