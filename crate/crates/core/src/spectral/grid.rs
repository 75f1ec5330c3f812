use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of grid points, `10^8`.
pub const DEFAULT_ELEMENT_CAP: u128 = 100_000_000;

/// Uniform periodic grid on the box `[-L, L)^N` with `n` points per axis.
///
/// Point `i` along an axis sits at `(i - n/2) h`, so the origin is a grid
/// point and the signed offset `i - n/2` ranges over `-n/2..n/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
    half_width: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, half_width: f64) -> Result<Self> {
        Self::with_cap(dim, n, half_width, DEFAULT_ELEMENT_CAP)
    }

    pub fn with_cap(dim: usize, n: usize, half_width: f64, cap: u128) -> Result<Self> {
        if dim < 1 || dim > u8::MAX as usize {
            return Err(Error::OutOfRange("dim"));
        }
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::OutOfRange("n"));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::OutOfRange("half_width"));
        }
        let points = (n as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
        if points > cap {
            return Err(Error::BudgetExceeded { points, cap });
        }
        Ok(Self {
            dim,
            n,
            half_width,
        })
    }

    /// Same spacing, twice the points and twice the half width.
    pub(crate) fn doubled(&self) -> Self {
        Self {
            dim: self.dim,
            n: 2 * self.n,
            half_width: 2.0 * self.half_width,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_dim(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `h^N`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Fundamental frequency `π/L`.
    pub fn frequency_step(&self) -> f64 {
        std::f64::consts::PI / self.half_width
    }

    /// Signed offset from the origin of axis index `i`.
    #[inline]
    pub fn offset(&self, i: usize) -> isize {
        i as isize - (self.n / 2) as isize
    }

    /// Signed wavenumber index of FFT bin `k`, in `-n/2..n/2`.
    #[inline]
    pub fn wavenumber(&self, k: usize) -> isize {
        if k < self.n / 2 {
            k as isize
        } else {
            k as isize - self.n as isize
        }
    }

    /// Row-major multi-index of flat index `flat`, last axis fastest.
    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for a in (0..self.dim).rev() {
            out[a] = flat % self.n;
            flat /= self.n;
        }
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn coords(&self, flat: usize, out: &mut [f64]) {
        let h = self.spacing();
        let mut idx = vec![0; self.dim];
        self.unravel(flat, &mut idx);
        for (o, &i) in out.iter_mut().zip(&idx) {
            *o = self.offset(i) as f64 * h;
        }
    }

    /// Flat index of the grid point at the origin.
    pub fn origin_index(&self) -> usize {
        self.ravel(&vec![self.n / 2; self.dim])
    }

    /// `|ξ|^2` at every FFT bin, row-major.
    pub fn frequency_squares(&self) -> Vec<f64> {
        let dk = self.frequency_step();
        let axis: Vec<f64> = (0..self.n)
            .map(|k| {
                let m = self.wavenumber(k) as f64 * dk;
                m * m
            })
            .collect();
        self.sum_over_axes(&axis)
    }

    /// `|x|^2` at every grid point, row-major.
    pub fn radius_squares(&self) -> Vec<f64> {
        let h = self.spacing();
        let axis: Vec<f64> = (0..self.n)
            .map(|i| {
                let x = self.offset(i) as f64 * h;
                x * x
            })
            .collect();
        self.sum_over_axes(&axis)
    }

    fn sum_over_axes(&self, axis: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        let mut idx = vec![0; self.dim];
        for (flat, o) in out.iter_mut().enumerate() {
            self.unravel(flat, &mut idx);
            *o = idx.iter().map(|&i| axis[i]).sum();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let g = Grid::new(1, 1024, 40.0).unwrap();
        assert_eq!(g.spacing(), 0.078125);
        assert_eq!(Grid::new(3, 64, 16.0).unwrap().len(), 262_144);
        assert!(matches!(
            Grid::new(4, 4096, 10.0),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(matches!(Grid::new(1, 6, 1.0), Err(Error::OutOfRange("n"))));
        assert!(matches!(Grid::new(1, 9, 1.0), Err(Error::OutOfRange("n"))));
    }

    #[test]
    fn origin_and_frequencies() {
        let g = Grid::new(2, 8, 4.0).unwrap();
        let mut x = [0.0; 2];
        g.coords(g.origin_index(), &mut x);
        assert_eq!(x, [0.0, 0.0]);
        g.coords(0, &mut x);
        assert_eq!(x, [-4.0, -4.0]);
        assert_eq!(g.wavenumber(4), -4);
        assert_eq!(g.wavenumber(3), 3);
        let k2 = g.frequency_squares();
        assert_eq!(k2[0], 0.0);
        let dk = std::f64::consts::PI / 4.0;
        assert!((k2[g.ravel(&[1, 7])] - 2.0 * dk * dk).abs() < 1e-15);
    }
}
