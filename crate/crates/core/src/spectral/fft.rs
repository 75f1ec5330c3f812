//! Separable N-dimensional complex FFT over row-major buffers.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::scalar::Real;

/// Lines are batched so each rayon task transforms at least this many points.
const MIN_POINTS_PER_TASK: usize = 1 << 14;

pub(crate) struct FftNd<T: Real> {
    dim: usize,
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> FftNd<T> {
    pub fn new(dim: usize, n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            dim,
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// Unnormalized forward transform, `e^{-2πi jk/n}` kernel.
    pub fn forward(&self, buf: &mut [Complex<T>]) {
        self.run(buf, &self.forward);
    }

    /// Inverse transform including the `1/n^N` normalization.
    pub fn inverse(&self, buf: &mut [Complex<T>]) {
        self.run(buf, &self.inverse);
        let norm = T::one() / T::of(self.len() as f64);
        buf.par_iter_mut().for_each(|c| *c = *c * norm);
    }

    fn run(&self, buf: &mut [Complex<T>], plan: &Arc<dyn Fft<T>>) {
        assert_eq!(buf.len(), self.len());
        let n = self.n;
        let lines_per_task = (MIN_POINTS_PER_TASK / n).max(1);
        for axis in 0..self.dim {
            let inner = n.pow((self.dim - 1 - axis) as u32);
            if inner == 1 {
                buf.par_chunks_mut(n * lines_per_task)
                    .for_each(|chunk| plan.process(chunk));
                continue;
            }
            let block = n * inner;
            let mut scratch = vec![Complex::new(T::zero(), T::zero()); block];
            for chunk in buf.chunks_mut(block) {
                transpose(chunk, &mut scratch, n, inner);
                scratch
                    .par_chunks_mut(n * lines_per_task)
                    .for_each(|lines| plan.process(lines));
                transpose(&scratch, chunk, inner, n);
            }
        }
    }
}

/// `dst[c][r] = src[r][c]` for a `rows x cols` row-major `src`.
fn transpose<T: Copy + Send + Sync>(src: &[T], dst: &mut [T], rows: usize, cols: usize) {
    dst.par_chunks_mut(rows).enumerate().for_each(|(c, out)| {
        for (r, o) in out.iter_mut().enumerate() {
            *o = src[r * cols + c];
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft_2d(input: &[Complex<f64>], n: usize) -> Vec<Complex<f64>> {
        let mut out = vec![Complex::new(0.0, 0.0); n * n];
        for k0 in 0..n {
            for k1 in 0..n {
                let mut acc = Complex::new(0.0, 0.0);
                for j0 in 0..n {
                    for j1 in 0..n {
                        let ph = -2.0 * std::f64::consts::PI * ((j0 * k0 + j1 * k1) as f64) / n as f64;
                        acc += input[j0 * n + j1] * Complex::from_polar(1.0, ph);
                    }
                }
                out[k0 * n + k1] = acc;
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft() {
        let n = 8;
        let input: Vec<Complex<f64>> = (0..n * n)
            .map(|i| Complex::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut buf = input.clone();
        let fft = FftNd::<f64>::new(2, n);
        fft.forward(&mut buf);
        let expected = naive_dft_2d(&input, n);
        for (a, b) in buf.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-12);
        }
        fft.inverse(&mut buf);
        for (a, b) in buf.iter().zip(&input) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn three_d_roundtrip() {
        let n = 16;
        let fft = FftNd::<f64>::new(3, n);
        let input: Vec<Complex<f64>> = (0..fft.len())
            .map(|i| Complex::new((i as f64 * 0.013).sin(), 0.0))
            .collect();
        let mut buf = input.clone();
        fft.forward(&mut buf);
        fft.inverse(&mut buf);
        for (a, b) in buf.iter().zip(&input) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
