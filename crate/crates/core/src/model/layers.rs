//! Single-sample forward and backward kernels. Activations are stored
//! channel-major: element `(c, t)` lives at `c * len + t`.

use alloc::vec::Vec;
use ndarray::linalg::general_mat_mul;
use ndarray::{ArrayView2, ArrayViewMut2};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conv1d {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub in_len: usize,
    pub out_len: usize,
    pub pad_left: usize,
    /// `out_channels x in_channels x kernel`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Conv1d {
    /// "Same" padding: `out_len = ceil(in_len / stride)`, extra padding on the right.
    pub fn new(in_channels: usize, out_channels: usize, kernel: usize, stride: usize, in_len: usize) -> Self {
        let out_len = in_len.div_ceil(stride);
        let total_pad = ((out_len - 1) * stride + kernel).saturating_sub(in_len);
        Self {
            in_channels,
            out_channels,
            kernel,
            stride,
            in_len,
            out_len,
            pad_left: total_pad / 2,
            weights: alloc::vec![0.0; out_channels * in_channels * kernel],
            bias: alloc::vec![0.0; out_channels],
        }
    }

    pub fn fan_in(&self) -> usize {
        self.in_channels * self.kernel
    }

    fn patch_len(&self) -> usize {
        self.in_channels * self.kernel
    }

    /// Unfold the input into a `(in_channels * kernel) x out_len` matrix
    /// whose row `c * kernel + j` holds `x[c][t * stride + j - pad_left]`
    /// (zero outside the signal).
    fn im2col(&self, x: &[f64], col: &mut Vec<f64>) {
        let (l_in, l_out) = (self.in_len, self.out_len);
        col.clear();
        col.resize(self.patch_len() * l_out, 0.0);
        for c in 0..self.in_channels {
            let xc = &x[c * l_in..(c + 1) * l_in];
            for j in 0..self.kernel {
                let row = &mut col[(c * self.kernel + j) * l_out..(c * self.kernel + j + 1) * l_out];
                for (t, v) in row.iter_mut().enumerate() {
                    let idx = (t * self.stride + j) as isize - self.pad_left as isize;
                    if idx >= 0 && (idx as usize) < l_in {
                        *v = xc[idx as usize];
                    }
                }
            }
        }
    }

    pub fn forward(&self, x: &[f64], y: &mut [f64], col: &mut Vec<f64>) {
        self.im2col(x, col);
        let l_out = self.out_len;
        for (o, yo) in y.chunks_exact_mut(l_out).enumerate() {
            yo.fill(self.bias[o]);
        }
        let w = ArrayView2::from_shape((self.out_channels, self.patch_len()), &self.weights).expect("weight shape");
        let cols = ArrayView2::from_shape((self.patch_len(), l_out), &col[..]).expect("column shape");
        let mut out = ArrayViewMut2::from_shape((self.out_channels, l_out), y).expect("output shape");
        general_mat_mul(1.0, &w, &cols, 1.0, &mut out);
    }

    /// Accumulate parameter gradients; write the input gradient into `dx`
    /// when given. `col` is scratch space.
    pub fn backward(&self, x: &[f64], dy: &[f64], dw: &mut [f64], db: &mut [f64], dx: Option<&mut [f64]>, col: &mut Vec<f64>) {
        let l_out = self.out_len;
        let (o_n, p_n) = (self.out_channels, self.patch_len());
        for (o, g) in dy.chunks_exact(l_out).enumerate() {
            db[o] += g.iter().sum::<f64>();
        }
        self.im2col(x, col);
        let dy_m = ArrayView2::from_shape((o_n, l_out), dy).expect("gradient shape");
        {
            let cols = ArrayView2::from_shape((p_n, l_out), &col[..]).expect("column shape");
            let mut dw_m = ArrayViewMut2::from_shape((o_n, p_n), dw).expect("weight gradient shape");
            general_mat_mul(1.0, &dy_m, &cols.t(), 1.0, &mut dw_m);
        }
        if let Some(dx) = dx {
            let w = ArrayView2::from_shape((o_n, p_n), &self.weights).expect("weight shape");
            {
                let mut dcol = ArrayViewMut2::from_shape((p_n, l_out), &mut col[..]).expect("column shape");
                general_mat_mul(1.0, &w.t(), &dy_m, 0.0, &mut dcol);
            }
            dx.fill(0.0);
            let l_in = self.in_len;
            for c in 0..self.in_channels {
                let dxc = &mut dx[c * l_in..(c + 1) * l_in];
                for j in 0..self.kernel {
                    let row = &col[(c * self.kernel + j) * l_out..(c * self.kernel + j + 1) * l_out];
                    for (t, g) in row.iter().enumerate() {
                        let idx = (t * self.stride + j) as isize - self.pad_left as isize;
                        if idx >= 0 && (idx as usize) < l_in {
                            dxc[idx as usize] += g;
                        }
                    }
                }
            }
        }
    }
}

/// Max pooling with stride equal to the width; a trailing partial window is
/// kept (`out_len = ceil(in_len / width)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxPool {
    pub width: usize,
    pub channels: usize,
    pub in_len: usize,
    pub out_len: usize,
}

impl MaxPool {
    pub fn new(width: usize, channels: usize, in_len: usize) -> Self {
        Self { width, channels, in_len, out_len: in_len.div_ceil(width) }
    }

    pub fn forward(&self, x: &[f64], y: &mut [f64], argmax: &mut [u32]) {
        for c in 0..self.channels {
            let xc = &x[c * self.in_len..(c + 1) * self.in_len];
            for i in 0..self.out_len {
                let start = i * self.width;
                let end = (start + self.width).min(self.in_len);
                let mut best = start;
                for t in start + 1..end {
                    if xc[t] > xc[best] {
                        best = t;
                    }
                }
                y[c * self.out_len + i] = xc[best];
                argmax[c * self.out_len + i] = (c * self.in_len + best) as u32;
            }
        }
    }

    pub fn backward(&self, dy: &[f64], argmax: &[u32], dx: &mut [f64]) {
        dx.fill(0.0);
        for (g, &idx) in dy.iter().zip(argmax) {
            dx[idx as usize] += g;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub in_dim: usize,
    pub out_dim: usize,
    /// `out_dim x in_dim`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn new(in_dim: usize, out_dim: usize) -> Self {
        Self { in_dim, out_dim, weights: alloc::vec![0.0; in_dim * out_dim], bias: alloc::vec![0.0; out_dim] }
    }

    pub fn forward(&self, x: &[f64], y: &mut [f64]) {
        for (o, yo) in y.iter_mut().enumerate() {
            let w = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            *yo = self.bias[o] + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    pub fn backward(&self, x: &[f64], dy: &[f64], dw: &mut [f64], db: &mut [f64], dx: Option<&mut [f64]>) {
        for (o, &g) in dy.iter().enumerate() {
            db[o] += g;
            for (d, xi) in dw[o * self.in_dim..(o + 1) * self.in_dim].iter_mut().zip(x) {
                *d += g * xi;
            }
        }
        if let Some(dx) = dx {
            dx.fill(0.0);
            for (o, &g) in dy.iter().enumerate() {
                for (d, w) in dx.iter_mut().zip(&self.weights[o * self.in_dim..(o + 1) * self.in_dim]) {
                    *d += g * w;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    /// Direct definition with explicit zero padding.
    fn naive_conv(conv: &Conv1d, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; conv.out_channels * conv.out_len];
        for o in 0..conv.out_channels {
            for t in 0..conv.out_len {
                let mut acc = conv.bias[o];
                for c in 0..conv.in_channels {
                    for j in 0..conv.kernel {
                        let idx = (t * conv.stride + j) as isize - conv.pad_left as isize;
                        if idx >= 0 && (idx as usize) < conv.in_len {
                            acc += conv.weights[(o * conv.in_channels + c) * conv.kernel + j] * x[c * conv.in_len + idx as usize];
                        }
                    }
                }
                y[o * conv.out_len + t] = acc;
            }
        }
        y
    }

    fn filled(n: usize, seed: u64) -> Vec<f64> {
        let mut s = seed;
        (0..n)
            .map(|_| {
                s = crate::seed::mix64(s);
                (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect()
    }

    #[test]
    fn conv_matches_naive_for_several_shapes() {
        for (cin, cout, k, s, l) in [(1, 3, 5, 1, 11), (2, 2, 5, 2, 9), (3, 1, 4, 1, 6), (2, 3, 5, 1, 1), (1, 1, 3, 3, 10)] {
            let mut conv = Conv1d::new(cin, cout, k, s, l);
            conv.weights = filled(conv.weights.len(), 1);
            conv.bias = filled(cout, 2);
            let x = filled(cin * l, 3);
            let mut y = vec![0.0; cout * conv.out_len];
            conv.forward(&x, &mut y, &mut Vec::new());
            let expected = naive_conv(&conv, &x);
            for (a, b) in y.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-12, "shape {cin} {cout} {k} {s} {l}");
            }
        }
    }

    #[test]
    fn same_padding_keeps_length() {
        let conv = Conv1d::new(1, 1, 5, 1, 155);
        assert_eq!((conv.out_len, conv.pad_left), (155, 2));
        let strided = Conv1d::new(1, 1, 5, 2, 155);
        assert_eq!(strided.out_len, 78);
    }

    #[test]
    fn pool_keeps_partial_window() {
        let pool = MaxPool::new(4, 1, 6);
        let mut y = vec![0.0; 2];
        let mut arg = vec![0; 2];
        pool.forward(&[1.0, 5.0, 2.0, 0.0, -1.0, 3.0], &mut y, &mut arg);
        assert_eq!(y, vec![5.0, 3.0]);
        assert_eq!(arg, vec![1, 5]);
    }
}
