use alloc::format;
use alloc::vec::Vec;

use super::{FeatureError, FeatureKind, FeatureMatrix, LOG_FLOOR};
use crate::audio::AudioClip;
use crate::dsp::{power_spectrogram, Matrix, PowerSpectrogram, SpectrogramParams};

/// Half-open bin ranges of the contrast bands: a sub-`fmin` band followed by
/// `n_bands` octaves starting at `fmin`. The top octave is extended to the
/// Nyquist bin.
pub fn contrast_band_edges(sr: u32, n_fft: usize, fmin: f64, n_bands: usize) -> Result<Vec<(usize, usize)>, FeatureError> {
    let nyquist = sr as f64 / 2.0;
    if n_bands == 0 || fmin <= 0.0 {
        return Err(FeatureError::BandOutOfRange(format!("need fmin > 0 and n_bands >= 1, got {fmin}, {n_bands}")));
    }
    let top_lower = fmin * libm::pow(2.0, (n_bands - 1) as f64);
    if top_lower >= nyquist {
        return Err(FeatureError::BandOutOfRange(format!(
            "octave starting at {top_lower} Hz is above the Nyquist frequency {nyquist} Hz"
        )));
    }
    let n_bins = n_fft / 2 + 1;
    let bin_hz = sr as f64 / n_fft as f64;
    // first bin at or above a frequency
    let bin_at = |f: f64| ((libm::ceil(f / bin_hz - 1e-9)).max(0.0) as usize).min(n_bins);
    let mut edges = Vec::with_capacity(n_bands + 1);
    edges.push((0, bin_at(fmin)));
    for b in 1..=n_bands {
        let lo = bin_at(fmin * libm::pow(2.0, (b - 1) as f64));
        let hi = if b == n_bands { n_bins } else { bin_at(fmin * libm::pow(2.0, b as f64)) };
        edges.push((lo, hi));
    }
    if let Some((i, _)) = edges.iter().enumerate().find(|(_, (lo, hi))| lo >= hi) {
        return Err(FeatureError::BandOutOfRange(format!("contrast band {i} contains no FFT bins")));
    }
    Ok(edges)
}

pub fn contrast_from_power(power: &PowerSpectrogram, fmin: f64, n_bands: usize, alpha: f64) -> Result<FeatureMatrix, FeatureError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(FeatureError::BandOutOfRange(format!("quantile fraction {alpha} outside (0, 1]")));
    }
    let sr = libm::round(power.bin_hz * power.params.n_fft as f64) as u32;
    let edges = contrast_band_edges(sr, power.params.n_fft, fmin, n_bands)?;
    let mut out = Matrix::zeros(edges.len(), power.n_frames());
    let mut band = Vec::new();
    for (b, &(lo, hi)) in edges.iter().enumerate() {
        let m = hi - lo;
        let q = (libm::ceil(alpha * m as f64) as usize).clamp(1, m);
        for t in 0..power.n_frames() {
            band.clear();
            band.extend((lo..hi).map(|k| power.bins.get(k, t)));
            band.sort_unstable_by(f64::total_cmp);
            let valley = band[..q].iter().sum::<f64>() / q as f64;
            let peak = band[m - q..].iter().sum::<f64>() / q as f64;
            let contrast = 10.0 * libm::log10(peak.max(LOG_FLOOR)) - 10.0 * libm::log10(valley.max(LOG_FLOOR));
            out.set(b, t, contrast);
        }
    }
    Ok(FeatureMatrix { kind: FeatureKind::Contrast, values: out })
}

pub fn spectral_contrast(
    clip: &AudioClip,
    params: &SpectrogramParams,
    fmin: f64,
    n_bands: usize,
    alpha: f64,
) -> Result<FeatureMatrix, FeatureError> {
    contrast_band_edges(clip.sample_rate, params.n_fft, fmin, n_bands)?;
    contrast_from_power(&power_spectrogram(clip, params)?, fmin, n_bands, alpha)
}
