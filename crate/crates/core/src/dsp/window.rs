use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Periodic Hann window, `w[k] = 0.5 - 0.5 cos(2πk/n)`.
///
/// A length-1 window is `[1.0]` so single-sample frames are not zeroed.
pub fn hann_window(n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![1.0; n];
    }
    (0..n)
        .map(|k| 0.5 - 0.5 * libm::cos(2.0 * PI * k as f64 / n as f64))
        .collect()
}
