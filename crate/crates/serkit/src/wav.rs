//! WAV decoding and encoding.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};
use serkit_core::audio::{AudioClip, AudioError};

use crate::error::{Error, Result};

/// Decode a PCM or IEEE-float WAV file into a mono clip in `[-1, 1]`.
/// Integer samples are divided by `2^(bits-1)`; channels are averaged.
pub fn read_wav(path: &Path) -> Result<AudioClip> {
    let wav_err = |source: AudioError| Error::Wav { path: path.to_path_buf(), source };
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = WavReader::new(std::io::BufReader::new(file)).map_err(|e| wav_err(classify(e)))?;
    let spec = reader.spec();
    let clip = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => {
            let samples: Vec<i16> = reader.into_samples::<i16>().collect::<std::result::Result<_, _>>().map_err(|e| wav_err(classify(e)))?;
            AudioClip::from_pcm_i16(&samples, spec.channels, spec.sample_rate)
        }
        (SampleFormat::Int, bits @ (8 | 24 | 32)) => {
            let scale = (1u64 << (bits - 1)) as f64;
            let samples: Vec<f32> = reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| (f64::from(v) / scale) as f32))
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| wav_err(classify(e)))?;
            AudioClip::from_pcm_f32(&samples, spec.channels, spec.sample_rate)
        }
        (SampleFormat::Float, 32) => {
            let samples: Vec<f32> = reader.into_samples::<f32>().collect::<std::result::Result<_, _>>().map_err(|e| wav_err(classify(e)))?;
            AudioClip::from_pcm_f32(&samples, spec.channels, spec.sample_rate)
        }
        (format, bits) => Err(AudioError::UnsupportedEncoding(format!("{format:?} with {bits} bits per sample"))),
    }
    .map_err(wav_err)?;
    Ok(clip.with_source(path.to_string_lossy()))
}

fn classify(e: hound::Error) -> AudioError {
    match e {
        hound::Error::Unsupported => AudioError::UnsupportedEncoding("format not supported by the decoder".into()),
        other => AudioError::MalformedContainer(other.to_string()),
    }
}

/// Encode a clip as mono 16-bit PCM.
pub fn write_wav(path: &Path, clip: &AudioClip) -> Result<()> {
    let spec = WavSpec { channels: 1, sample_rate: clip.sample_rate, bits_per_sample: 16, sample_format: SampleFormat::Int };
    let mut bytes = std::io::Cursor::new(Vec::new());
    {
        let mut w = WavWriter::new(&mut bytes, spec).map_err(|e| Error::parse(path, e))?;
        for &s in &clip.samples {
            let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
            w.write_sample(v).map_err(|e| Error::parse(path, e))?;
        }
        w.finalize().map_err(|e| Error::parse(path, e))?;
    }
    crate::atomic::write_atomic(path, bytes.get_ref())
}
