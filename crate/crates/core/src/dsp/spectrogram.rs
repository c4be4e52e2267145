use alloc::vec;
use serde::{Deserialize, Serialize};

use super::{hann_window, Complex, DspError, FrameIter, Matrix, RealFft};
use crate::audio::AudioClip;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindowKind {
    Hann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrogramParams {
    pub n_fft: usize,
    pub hop: usize,
    pub window: WindowKind,
}

impl Default for SpectrogramParams {
    fn default() -> Self {
        Self { n_fft: 2048, hop: 512, window: WindowKind::Hann }
    }
}

impl SpectrogramParams {
    pub fn new(n_fft: usize, hop: usize) -> Result<Self, DspError> {
        let p = Self { n_fft, hop, window: WindowKind::Hann };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), DspError> {
        if self.n_fft == 0 || !self.n_fft.is_power_of_two() {
            return Err(DspError::NotPowerOfTwo(self.n_fft));
        }
        if self.hop == 0 || self.hop > self.n_fft {
            return Err(DspError::InvalidParameter("hop must satisfy 0 < hop <= n_fft"));
        }
        Ok(())
    }

    pub fn n_bins(&self) -> usize {
        self.n_fft / 2 + 1
    }

    pub fn window(&self) -> alloc::vec::Vec<f64> {
        match self.window {
            WindowKind::Hann => hann_window(self.n_fft),
        }
    }
}

/// `|STFT|²`, shape `(n_fft/2 + 1) x n_frames`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrogram {
    pub bins: Matrix,
    pub bin_hz: f64,
    pub params: SpectrogramParams,
}

impl PowerSpectrogram {
    pub fn n_frames(&self) -> usize {
        self.bins.cols()
    }

    pub fn n_bins(&self) -> usize {
        self.bins.rows()
    }

    pub fn bin_frequency(&self, k: usize) -> f64 {
        k as f64 * self.bin_hz
    }
}

pub fn power_spectrogram(clip: &AudioClip, params: &SpectrogramParams) -> Result<PowerSpectrogram, DspError> {
    params.validate()?;
    let frames = FrameIter::new(&clip.samples, params.n_fft, params.hop)?;
    let fft = RealFft::new(params.n_fft)?;
    let window = params.window();
    let n_bins = params.n_bins();
    let n_frames = frames.len();

    let mut bins = Matrix::zeros(n_bins, n_frames);
    let mut frame = vec![0.0; params.n_fft];
    let mut spec = vec![Complex::new(0.0, 0.0); n_bins];
    let mut scratch = vec![Complex::new(0.0, 0.0); (params.n_fft / 2).max(1)];
    for t in 0..n_frames {
        frames.fill(t, &mut frame);
        for (x, w) in frame.iter_mut().zip(&window) {
            *x *= w;
        }
        fft.process_with_scratch(&frame, &mut spec, &mut scratch);
        for (k, z) in spec.iter().enumerate() {
            bins.set(k, t, z.norm_sqr());
        }
    }
    Ok(PowerSpectrogram {
        bins,
        bin_hz: clip.sample_rate as f64 / params.n_fft as f64,
        params: *params,
    })
}
