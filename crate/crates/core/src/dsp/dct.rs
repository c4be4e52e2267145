use alloc::vec::Vec;
use core::f64::consts::PI;

use super::DspError;

/// Orthonormal DCT-II with a precomputed basis, truncated to `n_out` outputs.
#[derive(Debug, Clone)]
pub struct Dct2 {
    n: usize,
    n_out: usize,
    /// `n_out x n`, row `k` is `alpha(k) cos(πk(2j+1)/2n)`.
    basis: Vec<f64>,
}

impl Dct2 {
    pub fn new(n: usize, n_out: usize) -> Result<Self, DspError> {
        if n_out == 0 || n_out > n {
            return Err(DspError::InvalidParameter("DCT output count must be in 1..=n"));
        }
        let nf = n as f64;
        let mut basis = Vec::with_capacity(n * n_out);
        for k in 0..n_out {
            let alpha = if k == 0 { libm::sqrt(1.0 / nf) } else { libm::sqrt(2.0 / nf) };
            for j in 0..n {
                basis.push(alpha * libm::cos(PI * k as f64 * (2 * j + 1) as f64 / (2.0 * nf)));
            }
        }
        Ok(Self { n, n_out, basis })
    }

    pub fn input_len(&self) -> usize {
        self.n
    }

    pub fn output_len(&self) -> usize {
        self.n_out
    }

    pub fn transform_into(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.n);
        for (k, o) in out.iter_mut().enumerate().take(self.n_out) {
            let row = &self.basis[k * self.n..(k + 1) * self.n];
            *o = row.iter().zip(v).map(|(b, x)| b * x).sum();
        }
    }

    pub fn transform(&self, v: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.n_out];
        self.transform_into(v, &mut out);
        out
    }
}

pub fn dct_ii_orthonormal(v: &[f64], n_out: usize) -> Result<Vec<f64>, DspError> {
    Ok(Dct2::new(v.len(), n_out)?.transform(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_vector_has_only_dc() {
        let c = dct_ii_orthonormal(&[2.0; 16], 16).unwrap();
        assert!((c[0] - 2.0 * 16.0 / libm::sqrt(16.0)).abs() < 1e-12);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn basis_vector_selects_single_coefficient() {
        let n = 32;
        let v: Vec<f64> = (0..n)
            .map(|j| libm::cos(PI * 3.0 * (2 * j + 1) as f64 / (2.0 * n as f64)))
            .collect();
        let c = dct_ii_orthonormal(&v, n).unwrap();
        for (k, ck) in c.iter().enumerate() {
            if k == 3 {
                assert!(ck.abs() > 1.0);
            } else {
                assert!(ck.abs() < 1e-10, "k={k} c={ck}");
            }
        }
    }

    #[test]
    fn full_transform_preserves_energy() {
        let v: Vec<f64> = (0..128).map(|j| libm::sin(j as f64 * 0.37) + 0.1 * j as f64).collect();
        let c = dct_ii_orthonormal(&v, 128).unwrap();
        let ev: f64 = v.iter().map(|x| x * x).sum();
        let ec: f64 = c.iter().map(|x| x * x).sum();
        assert!((ev - ec).abs() / ev < 1e-10);
    }

    #[test]
    fn rejects_bad_output_count() {
        assert!(dct_ii_orthonormal(&[1.0; 4], 0).is_err());
        assert!(dct_ii_orthonormal(&[1.0; 4], 5).is_err());
        assert_eq!(dct_ii_orthonormal(&[1.0; 4], 2).unwrap().len(), 2);
    }
}
