use alloc::vec;
use alloc::vec::Vec;

use super::DspError;

/// Map a possibly out-of-range index onto `0..len` by mirror reflection
/// about the first and last sample (the edge samples are not repeated).
pub fn reflect_index(i: isize, len: usize) -> usize {
    debug_assert!(len > 0);
    if len == 1 {
        return 0;
    }
    let period = 2 * (len as isize - 1);
    let mut j = i.rem_euclid(period);
    if j >= len as isize {
        j = period - j;
    }
    j as usize
}

/// Number of centered frames: `1 + len / hop`.
pub fn frame_count(len: usize, hop: usize) -> usize {
    1 + len / hop
}

/// Centered frames of a signal padded by `n_fft / 2` reflected samples on
/// each side. Frame `t` starts at padded index `t * hop`.
pub fn frame_signal(samples: &[f64], n_fft: usize, hop: usize) -> Result<Vec<Vec<f64>>, DspError> {
    let frames = FrameIter::new(samples, n_fft, hop)?;
    let mut out = Vec::with_capacity(frames.len());
    let mut buf = vec![0.0; n_fft];
    for t in 0..frames.len() {
        frames.fill(t, &mut buf);
        out.push(buf.clone());
    }
    Ok(out)
}

/// Allocation-free access to centered frames.
#[derive(Debug, Clone, Copy)]
pub struct FrameIter<'a> {
    samples: &'a [f64],
    n_fft: usize,
    hop: usize,
    n_frames: usize,
}

impl<'a> FrameIter<'a> {
    pub fn new(samples: &'a [f64], n_fft: usize, hop: usize) -> Result<Self, DspError> {
        if samples.is_empty() {
            return Err(DspError::EmptySignal);
        }
        if n_fft == 0 {
            return Err(DspError::InvalidParameter("frame length must be at least 1"));
        }
        if hop == 0 {
            return Err(DspError::InvalidParameter("hop must be at least 1"));
        }
        Ok(Self { samples, n_fft, hop, n_frames: frame_count(samples.len(), hop) })
    }

    pub fn len(&self) -> usize {
        self.n_frames
    }

    pub fn is_empty(&self) -> bool {
        self.n_frames == 0
    }

    pub fn frame_len(&self) -> usize {
        self.n_fft
    }

    /// Copy frame `t` into `out` (length `n_fft`).
    pub fn fill(&self, t: usize, out: &mut [f64]) {
        let len = self.samples.len();
        let pad = (self.n_fft / 2) as isize;
        let start = (t * self.hop) as isize - pad;
        // fast path when the frame lies inside the signal
        if start >= 0 && (start as usize) + self.n_fft <= len {
            let s = start as usize;
            out.copy_from_slice(&self.samples[s..s + self.n_fft]);
            return;
        }
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.samples[reflect_index(start + j as isize, len)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_count_matches_centered_convention() {
        let x = vec![0.0; 2048];
        assert_eq!(frame_signal(&x, 2048, 512).unwrap().len(), 5);
    }

    #[test]
    fn constant_signal_gives_constant_frames() {
        let x = vec![1.0; 5000];
        for f in frame_signal(&x, 256, 64).unwrap() {
            assert!(f.iter().all(|&v| v == 1.0));
        }
    }

    #[test]
    fn reflection_skips_edge_sample() {
        // numpy "reflect": [3 2 | 1 2 3 4 | 3 2]
        let len = 4;
        let idx: Vec<usize> = (-2..6).map(|i| reflect_index(i, len)).collect();
        assert_eq!(idx, vec![2, 1, 0, 1, 2, 3, 2, 1]);
    }

    #[test]
    fn errors_on_bad_input() {
        assert_eq!(frame_signal(&[], 4, 2), Err(DspError::EmptySignal));
        assert!(frame_signal(&[1.0], 0, 2).is_err());
        assert!(frame_signal(&[1.0], 4, 0).is_err());
    }

    #[test]
    fn short_signal_reflects_repeatedly() {
        let x = [1.0, 2.0];
        let frames = frame_signal(&x, 8, 1).unwrap();
        assert_eq!(frames.len(), 3);
        assert_eq!(frames[0], vec![1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
    }
}
