use super::{FeatureError, FeatureKind, FeatureMatrix};
use crate::audio::AudioClip;
use crate::dsp::{FrameIter, Matrix};

/// Fraction of adjacent sample pairs in each centered frame whose signs
/// differ. Zero counts as non-negative.
pub fn zcr(clip: &AudioClip, frame_len: usize, hop: usize) -> Result<FeatureMatrix, FeatureError> {
    if frame_len < 2 {
        return Err(FeatureError::DimensionMismatch("zero-crossing frames need at least 2 samples".into()));
    }
    let frames = FrameIter::new(&clip.samples, frame_len, hop)?;
    let mut out = Matrix::zeros(1, frames.len());
    let mut buf = alloc::vec![0.0; frame_len];
    for t in 0..frames.len() {
        frames.fill(t, &mut buf);
        let crossings = buf.windows(2).filter(|w| (w[0] >= 0.0) != (w[1] >= 0.0)).count();
        out.set(0, t, crossings as f64 / (frame_len - 1) as f64);
    }
    Ok(FeatureMatrix { kind: FeatureKind::Zcr, values: out })
}
