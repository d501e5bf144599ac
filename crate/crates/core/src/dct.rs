//! Orthonormal DCT-IV.
//!
//! `C[k][j] = sqrt(2/n) * cos(pi/(4n) * (2k+1) * (2j+1))` (0-based). The
//! matrix is symmetric and orthogonal, so the transform is its own inverse.
//! [`Dct4`] evaluates it in `O(n log n)` through a zero-padded complex FFT of
//! length `2n`; [`dct4_matrix`] is the dense reference.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Planned DCT-IV of a fixed length.
#[derive(Clone)]
pub struct Dct4 {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
    pre: Vec<Complex64>,
    post: Vec<Complex64>,
    scratch_len: usize,
}

impl fmt::Debug for Dct4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dct4").field("n", &self.n).finish()
    }
}

/// Reusable buffers for [`Dct4::apply_with`].
#[derive(Debug, Default, Clone)]
pub struct Dct4Work {
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Dct4 {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "DCT-IV length must be positive");
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(2 * n);
        let nf = n as f64;
        let scale = (2.0 / nf).sqrt();
        // X_k = scale * Re[ e^{-i pi (2k+1)/(4n)} * sum_j x_j e^{-i pi j/(2n)} e^{-2 pi i jk/(2n)} ]
        let pre = (0..n)
            .map(|j| Complex64::from_polar(1.0, -PI * j as f64 / (2.0 * nf)))
            .collect();
        let post = (0..n)
            .map(|k| Complex64::from_polar(scale, -PI * (2 * k + 1) as f64 / (4.0 * nf)))
            .collect();
        let scratch_len = fft.get_inplace_scratch_len();
        Self { n, fft, pre, post, scratch_len }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn apply(&self, input: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.apply_with(input, &mut out, &mut Dct4Work::default());
        out
    }

    pub fn apply_with(&self, input: &[f64], output: &mut [f64], work: &mut Dct4Work) {
        assert_eq!(input.len(), self.n);
        assert_eq!(output.len(), self.n);
        let m = 2 * self.n;
        work.buf.clear();
        work.buf.extend(input.iter().zip(&self.pre).map(|(&x, &w)| w * x));
        work.buf.resize(m, Complex64::new(0.0, 0.0));
        if work.scratch.len() < self.scratch_len {
            work.scratch.resize(self.scratch_len, Complex64::new(0.0, 0.0));
        }
        self.fft.process_with_scratch(&mut work.buf, &mut work.scratch[..self.scratch_len]);
        for ((o, b), w) in output.iter_mut().zip(&work.buf).zip(&self.post) {
            *o = (w * b).re;
        }
    }
}

/// Entry `(k, j)` of the orthonormal DCT-IV matrix, 0-based.
pub fn dct4_entry(n: usize, k: usize, j: usize) -> f64 {
    let nf = n as f64;
    (2.0 / nf).sqrt() * (PI / (4.0 * nf) * ((2 * k + 1) * (2 * j + 1)) as f64).cos()
}

/// Dense DCT-IV matrix, row-major.
pub fn dct4_matrix(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|k| (0..n).map(|j| dct4_entry(n, k, j)).collect()).collect()
}
