//! Mono sample buffers, sample-rate conversion and amplitude statistics.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Rate every clip is converted to before feature extraction.
pub const CANONICAL_SAMPLE_RATE: u32 = 22_050;

/// Taps per polyphase branch of the resampling filter.
pub const RESAMPLER_TAPS: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AudioError {
    #[error("malformed container: {0}")]
    MalformedContainer(String),
    #[error("unsupported encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("audio contains no sample frames")]
    EmptyAudio,
    #[error("sample rate must be positive")]
    InvalidSampleRate,
    #[error("sample {index} is outside [-1, 1] or not finite")]
    SampleOutOfRange { index: usize },
}

/// Mono audio normalized to `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AudioClip {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    pub source_path: Option<String>,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self, AudioError> {
        if sample_rate == 0 {
            return Err(AudioError::InvalidSampleRate);
        }
        if samples.is_empty() {
            return Err(AudioError::EmptyAudio);
        }
        if let Some(index) = samples.iter().position(|s| !(-1.0..=1.0).contains(s)) {
            return Err(AudioError::SampleOutOfRange { index });
        }
        Ok(Self { samples, sample_rate, source_path: None })
    }

    /// Like [`AudioClip::new`] but clamps out-of-range samples and maps
    /// non-finite values to zero.
    pub fn from_samples_clamped(samples: Vec<f64>, sample_rate: u32) -> Result<Self, AudioError> {
        let samples = samples
            .into_iter()
            .map(|s| if s.is_finite() { s.clamp(-1.0, 1.0) } else { 0.0 })
            .collect();
        Self::new(samples, sample_rate)
    }

    /// Decode interleaved signed 16-bit PCM, dividing by 32768 and averaging
    /// channels.
    pub fn from_pcm_i16(interleaved: &[i16], channels: u16, sample_rate: u32) -> Result<Self, AudioError> {
        mixdown(interleaved, channels, sample_rate, |s| f64::from(s) / 32768.0)
    }

    /// Decode interleaved IEEE float samples, averaging channels. Values
    /// outside `[-1, 1]` are clamped.
    pub fn from_pcm_f32(interleaved: &[f32], channels: u16, sample_rate: u32) -> Result<Self, AudioError> {
        mixdown(interleaved, channels, sample_rate, |s| {
            let v = f64::from(s);
            if v.is_finite() {
                v.clamp(-1.0, 1.0)
            } else {
                0.0
            }
        })
    }

    pub fn with_source(mut self, path: impl Into<String>) -> Self {
        self.source_path = Some(path.into());
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

fn mixdown<T: Copy>(
    interleaved: &[T],
    channels: u16,
    sample_rate: u32,
    to_f64: impl Fn(T) -> f64,
) -> Result<AudioClip, AudioError> {
    let ch = usize::from(channels);
    if !(1..=2).contains(&ch) {
        return Err(AudioError::UnsupportedEncoding(alloc::format!("{channels} channels")));
    }
    if !interleaved.len().is_multiple_of(ch) {
        return Err(AudioError::MalformedContainer("partial sample frame".into()));
    }
    let samples = interleaved
        .chunks_exact(ch)
        .map(|frame| frame.iter().map(|&s| to_f64(s)).sum::<f64>() / ch as f64)
        .collect();
    AudioClip::new(samples, sample_rate)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Rational-ratio polyphase resampler with a Hann-windowed sinc kernel.
#[derive(Debug, Clone)]
pub struct Resampler {
    up: usize,
    down: usize,
    /// `up` branches of [`RESAMPLER_TAPS`] coefficients each.
    branches: Vec<f64>,
}

impl Resampler {
    pub fn new(source_sr: u32, target_sr: u32) -> Result<Self, AudioError> {
        if source_sr == 0 || target_sr == 0 {
            return Err(AudioError::InvalidSampleRate);
        }
        let g = gcd(u64::from(source_sr), u64::from(target_sr));
        let up = (u64::from(target_sr) / g) as usize;
        let down = (u64::from(source_sr) / g) as usize;
        // cutoff relative to the input Nyquist frequency
        let cutoff = if up < down { up as f64 / down as f64 } else { 1.0 };
        let half = (RESAMPLER_TAPS / 2) as f64;

        let mut branches = Vec::with_capacity(up * RESAMPLER_TAPS);
        for phase in 0..up {
            let frac = phase as f64 / up as f64;
            let start = branches.len();
            for j in 0..RESAMPLER_TAPS {
                // input offset relative to the output instant
                let d = (j as f64 - (half - 1.0)) - frac;
                let window = if d.abs() < half { 0.5 + 0.5 * libm::cos(PI * d / half) } else { 0.0 };
                branches.push(cutoff * sinc(cutoff * d) * window);
            }
            let sum: f64 = branches[start..].iter().sum();
            for c in &mut branches[start..] {
                *c /= sum;
            }
        }
        Ok(Self { up, down, branches })
    }

    pub fn ratio(&self) -> (usize, usize) {
        (self.up, self.down)
    }

    pub fn output_len(&self, input_len: usize) -> usize {
        (input_len * self.up).div_ceil(self.down)
    }

    pub fn process(&self, input: &[f64]) -> Vec<f64> {
        let n_out = self.output_len(input.len());
        let lead = RESAMPLER_TAPS / 2 - 1;
        let mut out = Vec::with_capacity(n_out);
        for n in 0..n_out {
            let pos = n * self.down;
            let base = pos / self.up;
            let phase = pos % self.up;
            let taps = &self.branches[phase * RESAMPLER_TAPS..(phase + 1) * RESAMPLER_TAPS];
            let mut acc = 0.0;
            for (j, &h) in taps.iter().enumerate() {
                let idx = base as isize + j as isize - lead as isize;
                if idx >= 0 && (idx as usize) < input.len() {
                    acc += h * input[idx as usize];
                }
            }
            out.push(acc);
        }
        out
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        libm::sin(PI * x) / (PI * x)
    }
}

/// Convert `clip` to `target_sr`. Returns an unchanged copy when the rates
/// already match.
pub fn resample(clip: &AudioClip, target_sr: u32) -> Result<AudioClip, AudioError> {
    if target_sr == 0 {
        return Err(AudioError::InvalidSampleRate);
    }
    if target_sr == clip.sample_rate {
        return Ok(clip.clone());
    }
    let resampler = Resampler::new(clip.sample_rate, target_sr)?;
    let mut out = AudioClip::from_samples_clamped(resampler.process(&clip.samples), target_sr)?;
    out.source_path = clip.source_path.clone();
    Ok(out)
}

/// Linear mean of `|sample|` over the whole clip.
pub fn mean_abs_amplitude(clip: &AudioClip) -> f64 {
    if clip.samples.is_empty() {
        return 0.0;
    }
    clip.samples.iter().map(|s| s.abs()).sum::<f64>() / clip.samples.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::fft_real;
    use alloc::vec;
    use proptest::prelude::*;

    fn tone(freq: f64, sr: u32, n: usize, amp: f64) -> Vec<f64> {
        (0..n).map(|i| amp * libm::sin(2.0 * PI * freq * i as f64 / sr as f64)).collect()
    }

    #[test]
    fn pcm16_full_scale_normalization() {
        let c = AudioClip::from_pcm_i16(&[32767], 1, 8000).unwrap();
        assert!((c.samples[0] - 0.99997).abs() < 1e-5);
        let c = AudioClip::from_pcm_i16(&[-32768], 1, 8000).unwrap();
        assert_eq!(c.samples[0], -1.0);
    }

    #[test]
    fn stereo_mixdown_is_mean() {
        let c = AudioClip::from_pcm_f32(&[0.5, -0.5, 0.25, 0.75], 2, 8000).unwrap();
        assert_eq!(c.samples, vec![0.0, 0.5]);
    }

    #[test]
    fn constructor_rejects_invalid() {
        assert_eq!(AudioClip::new(vec![], 8000), Err(AudioError::EmptyAudio));
        assert_eq!(AudioClip::new(vec![0.0], 0), Err(AudioError::InvalidSampleRate));
        assert_eq!(AudioClip::new(vec![0.0, 1.5], 8000), Err(AudioError::SampleOutOfRange { index: 1 }));
        assert!(AudioClip::from_pcm_i16(&[0, 0, 0], 3, 8000).is_err());
        assert!(AudioClip::from_pcm_i16(&[], 1, 8000).is_err());
    }

    #[test]
    fn resample_identity() {
        let clip = AudioClip::new(tone(300.0, 8000, 1000, 0.5), 8000).unwrap();
        assert_eq!(resample(&clip, 8000).unwrap(), clip);
        assert!(resample(&clip, 0).is_err());
    }

    #[test]
    fn resampled_sine_keeps_its_frequency() {
        let clip = AudioClip::new(tone(440.0, 48_000, 48_000, 0.8), 48_000).unwrap();
        let out = resample(&clip, 22_050).unwrap();
        assert!((out.len() as f64 - 22_050.0).abs() <= 1.0);
        let n = 16_384;
        let spec = fft_real(&out.samples[2000..2000 + n]).unwrap();
        let peak = spec
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap()
            .0;
        let bin_hz = 22_050.0 / n as f64;
        assert!((peak as f64 * bin_hz - 440.0).abs() <= bin_hz, "peak at {}", peak as f64 * bin_hz);
    }

    #[test]
    fn resample_preserves_dc() {
        for (from, to) in [(48_000, 22_050), (16_000, 22_050), (44_100, 22_050), (22_050, 48_000)] {
            let clip = AudioClip::new(vec![0.3; 5000], from).unwrap();
            let out = resample(&clip, to).unwrap();
            // skip outputs whose kernel reaches past either end of the input
            let edge = (16 * to).div_ceil(from) as usize;
            for &s in &out.samples[edge..out.len() - edge] {
                assert!((s - 0.3).abs() < 1e-3, "{from}->{to}: {s}");
            }
        }
    }

    #[test]
    fn resample_composes() {
        let sr = 11_025;
        let x: Vec<f64> = (0..8000)
            .map(|i| {
                let t = i as f64 / 44_100.0;
                0.4 * libm::sin(2.0 * PI * 300.0 * t) + 0.3 * libm::sin(2.0 * PI * 1700.0 * t + 0.3)
            })
            .collect();
        let clip = AudioClip::new(x, 44_100).unwrap();
        let direct = resample(&clip, sr).unwrap();
        let twice = resample(&resample(&clip, 2 * sr).unwrap(), sr).unwrap();
        let n = direct.len().min(twice.len());
        let interior = 32..n - 32;
        let count = interior.len() as f64;
        let mse: f64 = interior.map(|i| (direct.samples[i] - twice.samples[i]).powi(2)).sum::<f64>() / count;
        assert!(libm::sqrt(mse) < 1e-3, "rms {}", libm::sqrt(mse));
    }

    #[test]
    fn amplitude_edge_cases() {
        assert_eq!(mean_abs_amplitude(&AudioClip::new(vec![0.0; 10], 8000).unwrap()), 0.0);
        let square: Vec<f64> = (0..100).map(|i| if i % 7 < 3 { 1.0 } else { -1.0 }).collect();
        assert_eq!(mean_abs_amplitude(&AudioClip::new(square, 8000).unwrap()), 1.0);
    }

    proptest! {
        #[test]
        fn amplitude_is_scale_equivariant(
            xs in proptest::collection::vec(-0.5f64..0.5, 1..200),
            k in -2.0f64..2.0,
        ) {
            let a = mean_abs_amplitude(&AudioClip::new(xs.clone(), 8000).unwrap());
            let scaled = AudioClip::new(xs.iter().map(|x| k * x).collect(), 8000).unwrap();
            let b = mean_abs_amplitude(&scaled);
            prop_assert!((b - k.abs() * a).abs() < 1e-12);
        }
    }
}
