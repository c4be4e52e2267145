use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::DspError;

pub type Complex = num_complex::Complex<f64>;

/// Planned real-input FFT of a fixed power-of-two length.
///
/// A length-`n` real frame is packed into an `n/2`-point complex sequence
/// (even samples real, odd samples imaginary), transformed with an iterative
/// radix-2 FFT and then split back into the `n/2 + 1` non-negative bins.
#[derive(Debug, Clone)]
pub struct RealFft {
    n: usize,
    half: HalfFft,
    /// `exp(-2πik/n)` for `k in 0..=n/2`.
    split: Vec<Complex>,
}

#[derive(Debug, Clone)]
struct HalfFft {
    m: usize,
    bitrev: Vec<usize>,
    /// `exp(-2πij/m)` for `j in 0..m/2`.
    twiddles: Vec<Complex>,
}

fn expi(theta: f64) -> Complex {
    Complex::new(libm::cos(theta), libm::sin(theta))
}

impl HalfFft {
    fn new(m: usize) -> Self {
        let bits = m.trailing_zeros();
        let bitrev = (0..m)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        let twiddles = (0..m / 2).map(|j| expi(-2.0 * PI * j as f64 / m as f64)).collect();
        Self { m, bitrev, twiddles }
    }

    fn process(&self, buf: &mut [Complex]) {
        let m = self.m;
        for i in 0..m {
            let j = self.bitrev[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= m {
            let half = len / 2;
            let stride = m / len;
            for start in (0..m).step_by(len) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

impl RealFft {
    pub fn new(n: usize) -> Result<Self, DspError> {
        if n == 0 || !n.is_power_of_two() {
            return Err(DspError::NotPowerOfTwo(n));
        }
        let m = (n / 2).max(1);
        let split = (0..=n / 2).map(|k| expi(-2.0 * PI * k as f64 / n as f64)).collect();
        Ok(Self { n, half: HalfFft::new(m), split })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn n_bins(&self) -> usize {
        self.n / 2 + 1
    }

    /// Transform `input` (length `n`) into `output` (length `n/2 + 1`).
    /// `scratch` must hold `n/2` values; its contents are overwritten.
    pub fn process_with_scratch(&self, input: &[f64], output: &mut [Complex], scratch: &mut [Complex]) {
        assert_eq!(input.len(), self.n);
        assert_eq!(output.len(), self.n_bins());
        if self.n == 1 {
            output[0] = Complex::new(input[0], 0.0);
            return;
        }
        let m = self.n / 2;
        let z = &mut scratch[..m];
        for (t, zt) in z.iter_mut().enumerate() {
            *zt = Complex::new(input[2 * t], input[2 * t + 1]);
        }
        self.half.process(z);
        for k in 0..=m {
            let zk = z[k % m];
            let zc = z[(m - k) % m].conj();
            let even = (zk + zc) * 0.5;
            // (zk - zc) / 2i
            let diff = zk - zc;
            let odd = Complex::new(diff.im * 0.5, -diff.re * 0.5);
            output[k] = even + self.split[k] * odd;
        }
    }

    pub fn process(&self, input: &[f64]) -> Vec<Complex> {
        let mut out = vec![Complex::new(0.0, 0.0); self.n_bins()];
        let mut scratch = vec![Complex::new(0.0, 0.0); (self.n / 2).max(1)];
        self.process_with_scratch(input, &mut out, &mut scratch);
        out
    }
}

/// One-shot real FFT returning the `n/2 + 1` non-negative frequency bins.
pub fn fft_real(frame: &[f64]) -> Result<Vec<Complex>, DspError> {
    Ok(RealFft::new(frame.len())?.process(frame))
}
