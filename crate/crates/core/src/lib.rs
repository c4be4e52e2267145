//! Speech emotion recognition building blocks that only need an allocator.
//!
//! The crate is organised bottom-up:
//!
//! * [`audio`] holds the [`AudioClip`] buffer type, sample-rate conversion and
//!   whole-clip amplitude statistics.
//! * [`dsp`] provides framing, windows, a radix-2 real FFT, power spectrograms
//!   and an orthonormal DCT-II.
//! * [`features`] builds the spectral features (MFCC, mel spectrogram, spectral
//!   contrast, chroma, CENS, zero-crossing rate, tonnetz and the STFT
//!   magnitude) and aggregates them into fixed-length vectors.
//! * [`model`] is a small 1-D convolutional classifier trained with Adam.
//! * [`experiments`] contains label schemes, stratified folds, metrics and the
//!   mono-, multi-, cross-lingual and gender evaluation protocols.
//!
//! Everything that touches the filesystem lives in the `serkit` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod audio;
pub mod dsp;
pub mod experiments;
pub mod features;
pub mod model;
pub mod seed;

pub use audio::AudioClip;
pub use features::{FeatureKind, FeatureMatrix, FeatureVector};
pub use model::CnnModel;
