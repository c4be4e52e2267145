use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{FeatureError, FeatureKind, FeatureMatrix};
use crate::audio::AudioClip;
use crate::dsp::{power_spectrogram, Matrix, PowerSpectrogram, SpectrogramParams};

/// Pitch class of a frequency (C = 0, A = 9) on an A440 equal-tempered scale.
/// Returns `None` for non-positive frequencies.
pub fn pitch_class(freq: f64) -> Option<usize> {
    if freq <= 0.0 {
        return None;
    }
    let midi = libm::round(12.0 * libm::log2(freq / 440.0)) as i64 + 69;
    Some(midi.rem_euclid(12) as usize)
}

/// Fold bin powers into 12 pitch classes; each column is scaled so its
/// maximum is 1 (silent columns stay zero).
pub fn chroma_from_power(power: &PowerSpectrogram) -> FeatureMatrix {
    let classes: Vec<Option<usize>> = (0..power.n_bins()).map(|k| pitch_class(power.bin_frequency(k))).collect();
    let mut out = Matrix::zeros(12, power.n_frames());
    for (k, class) in classes.iter().enumerate() {
        let Some(c) = *class else { continue };
        for (d, p) in out.row_mut(c).iter_mut().zip(power.bins.row(k)) {
            *d += p;
        }
    }
    for t in 0..out.cols() {
        let max = (0..12).map(|c| out.get(c, t)).fold(0.0, f64::max);
        if max > 0.0 {
            for c in 0..12 {
                out.set(c, t, out.get(c, t) / max);
            }
        }
    }
    FeatureMatrix { kind: FeatureKind::Chroma, values: out }
}

pub fn chromagram(clip: &AudioClip, params: &SpectrogramParams) -> Result<FeatureMatrix, FeatureError> {
    Ok(chroma_from_power(&power_spectrogram(clip, params)?))
}

fn require_chroma(chroma: &FeatureMatrix) -> Result<(), FeatureError> {
    if chroma.rows() != 12 {
        return Err(FeatureError::DimensionMismatch(alloc::format!(
            "expected 12 chroma rows, got {}",
            chroma.rows()
        )));
    }
    Ok(())
}

fn l1_normalized(column: &mut [f64]) {
    let sum: f64 = column.iter().map(|v| v.abs()).sum();
    if sum > 0.0 {
        column.iter_mut().for_each(|v| *v /= sum);
    }
}

/// CENS quantization: `>= 0.4 -> 4`, `>= 0.2 -> 3`, `>= 0.1 -> 2`, `>= 0.05 -> 1`.
fn quantize(v: f64) -> f64 {
    [0.05, 0.1, 0.2, 0.4].iter().filter(|&&t| v >= t).count() as f64
}

/// Chroma energy normalized statistics.
pub fn cens(chroma: &FeatureMatrix, smooth_win: usize, downsample: usize) -> Result<FeatureMatrix, FeatureError> {
    require_chroma(chroma)?;
    if smooth_win == 0 || downsample == 0 {
        return Err(FeatureError::DimensionMismatch("smoothing window and downsample factor must be positive".into()));
    }
    let n = chroma.n_frames();
    let mut quantized = Matrix::zeros(12, n);
    let mut col = vec![0.0; 12];
    for t in 0..n {
        for (c, v) in col.iter_mut().enumerate() {
            *v = chroma.values.get(c, t);
        }
        l1_normalized(&mut col);
        for (c, v) in col.iter().enumerate() {
            quantized.set(c, t, quantize(*v));
        }
    }

    // symmetric Hann without its zero end points
    let kernel: Vec<f64> = (1..=smooth_win)
        .map(|i| 0.5 - 0.5 * libm::cos(2.0 * PI * i as f64 / (smooth_win + 1) as f64))
        .collect();
    let ksum: f64 = kernel.iter().sum();
    let half = (smooth_win / 2) as isize;

    let out_cols = n.div_ceil(downsample);
    let mut out = Matrix::zeros(12, out_cols);
    for (o, t) in (0..n).step_by(downsample).enumerate() {
        for c in 0..12 {
            let row = quantized.row(c);
            let mut acc = 0.0;
            for (j, w) in kernel.iter().enumerate() {
                let idx = t as isize + j as isize - half;
                if idx >= 0 && (idx as usize) < n {
                    acc += w * row[idx as usize];
                }
            }
            out.set(c, o, acc / ksum);
        }
        let norm = libm::sqrt((0..12).map(|c| out.get(c, o) * out.get(c, o)).sum::<f64>());
        if norm > 0.0 {
            for c in 0..12 {
                out.set(c, o, out.get(c, o) / norm);
            }
        }
    }
    Ok(FeatureMatrix { kind: FeatureKind::Cens, values: out })
}

/// Tonal centroid: projections of the L1-normalized chroma onto the circles
/// of fifths, minor thirds and major thirds.
pub fn tonnetz(chroma: &FeatureMatrix) -> Result<FeatureMatrix, FeatureError> {
    require_chroma(chroma)?;
    const CIRCLES: [(f64, f64); 3] = [(7.0 * PI / 6.0, 1.0), (3.0 * PI / 2.0, 1.0), (2.0 * PI / 3.0, 0.5)];
    let mut basis = [[0.0; 12]; 6];
    for (i, &(step, radius)) in CIRCLES.iter().enumerate() {
        let (sin_row, cos_row) = basis.split_at_mut(2 * i + 1);
        for (k, (s, c)) in sin_row[2 * i].iter_mut().zip(cos_row[0].iter_mut()).enumerate() {
            *s = radius * libm::sin(k as f64 * step);
            *c = radius * libm::cos(k as f64 * step);
        }
    }
    let n = chroma.n_frames();
    let mut out = Matrix::zeros(6, n);
    let mut col = vec![0.0; 12];
    for t in 0..n {
        for (c, v) in col.iter_mut().enumerate() {
            *v = chroma.values.get(c, t);
        }
        l1_normalized(&mut col);
        for (d, b) in basis.iter().enumerate() {
            out.set(d, t, b.iter().zip(&col).map(|(x, y)| x * y).sum());
        }
    }
    Ok(FeatureMatrix { kind: FeatureKind::Tonnetz, values: out })
}
