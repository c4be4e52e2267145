//! Framing, windowing, FFT and DCT kernels shared by every feature.

mod dct;
mod fft;
mod frame;
mod matrix;
mod spectrogram;
mod window;

pub use dct::{dct_ii_orthonormal, Dct2};
pub use fft::{fft_real, Complex, RealFft};
pub use frame::{frame_count, frame_signal, reflect_index, FrameIter};
pub use matrix::Matrix;
pub use spectrogram::{power_spectrogram, PowerSpectrogram, SpectrogramParams, WindowKind};
pub use window::hann_window;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DspError {
    #[error("signal is empty")]
    EmptySignal,
    #[error("transform length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}
