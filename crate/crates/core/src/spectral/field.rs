use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::Grid;

/// Real scalar field sampled on a [`Grid`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: Grid,
    values: Vec<T>,
}

impl<T: Real> Field<T> {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![T::zero(); grid.len()],
        }
    }

    /// Rejects length mismatches and non-finite entries.
    pub fn new(grid: Grid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidField(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidField(format!("non-finite value at index {i}")));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut x = vec![0.0; grid.dim()];
        let values = (0..grid.len())
            .map(|i| {
                grid.coords(i, &mut x);
                T::of(f(&x))
            })
            .collect();
        Self { grid, values }
    }

    /// Samples a radial profile `f(|x|)`.
    pub fn radial(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| f(x.iter().map(|v| v * v).sum::<f64>().sqrt()))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Discrete inner product `h^N Σ u_j v_j`.
    pub fn dot(&self, other: &Self) -> T {
        debug_assert_eq!(self.grid, other.grid);
        let s: T = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a * b)
            .sum();
        s * T::of(self.grid.cell_volume())
    }

    /// `h^N Σ u_j`
    pub fn integral(&self) -> T {
        self.values.iter().copied().sum::<T>() * T::of(self.grid.cell_volume())
    }

    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |m, v| if v.abs() > m { v.abs() } else { m })
    }

    pub fn max(&self) -> T {
        self.values
            .iter()
            .copied()
            .fold(T::neg_infinity(), |m, v| if v > m { v } else { m })
    }

    pub fn min(&self) -> T {
        self.values
            .iter()
            .copied()
            .fold(T::infinity(), |m, v| if v < m { v } else { m })
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn scale(&mut self, c: T) {
        self.values.iter_mut().for_each(|v| *v = *v * c);
    }

    pub fn scaled(&self, c: T) -> Self {
        self.map(|v| v * c)
    }

    /// `self += c * other`
    pub fn axpy(&mut self, c: T, other: &Self) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, &b) in self.values.iter_mut().zip(&other.values) {
            *a = *a + c * b;
        }
    }

    /// Circular shift: the value at multi-index `i` moves to `i + shift`.
    pub fn shifted(&self, shift: &[isize]) -> Self {
        let g = self.grid;
        let n = g.points_per_dim() as isize;
        let mut out = vec![T::zero(); g.len()];
        let mut idx = vec![0; g.dim()];
        for (flat, &v) in self.values.iter().enumerate() {
            g.unravel(flat, &mut idx);
            for (i, s) in idx.iter_mut().zip(shift) {
                *i = (*i as isize + s).rem_euclid(n) as usize;
            }
            out[g.ravel(&idx)] = v;
        }
        Self::from_raw(g, out)
    }

    /// Shift so the largest value sits at the origin grid point.
    pub fn recentered(&self) -> Self {
        let g = self.grid;
        let mut at = vec![0; g.dim()];
        g.unravel(self.argmax(), &mut at);
        let half = (g.points_per_dim() / 2) as isize;
        let shift: Vec<isize> = at.iter().map(|&i| half - i as isize).collect();
        self.shifted(&shift)
    }

    /// `u` or `-u`, whichever has the larger positive extreme.
    pub fn sign_normalized(&self) -> Self {
        if self.max() >= -self.min() {
            self.clone()
        } else {
            self.map(|v| -v)
        }
    }

    pub fn convert<U: Real>(&self) -> Field<U> {
        Field::from_raw(
            self.grid,
            self.values
                .iter()
                .map(|v| U::of(v.to_f64_lossy()))
                .collect(),
        )
    }
}

impl<T: Real> Add for &Field<T> {
    type Output = Field<T>;
    fn add(self, rhs: Self) -> Field<T> {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl<T: Real> Sub for &Field<T> {
    type Output = Field<T>;
    fn sub(self, rhs: Self) -> Field<T> {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl<T: Real> Mul<T> for &Field<T> {
    type Output = Field<T>;
    fn mul(self, rhs: T) -> Field<T> {
        self.scaled(rhs)
    }
}

impl<T: Real> Neg for &Field<T> {
    type Output = Field<T>;
    fn neg(self) -> Field<T> {
        self.map(|v| -v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_values() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        assert!(Field::<f64>::new(g, vec![0.0; 7]).is_err());
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(Field::<f64>::new(g, v).is_err());
    }

    #[test]
    fn recentering_moves_peak_to_origin() {
        let g = Grid::new(2, 8, 4.0).unwrap();
        let u: Field<f64> = Field::from_fn(g, |x| (-(x[0] - 1.0).powi(2) - (x[1] + 2.0).powi(2)).exp());
        let c = u.recentered();
        assert_eq!(c.argmax(), g.origin_index());
        assert_eq!(c.values()[g.origin_index()], 1.0);
    }

    #[test]
    fn quadrature_of_gaussian() {
        let g = Grid::new(2, 64, 8.0).unwrap();
        let u: Field<f64> = Field::radial(g, |r| (-r * r).exp());
        assert!((u.integral() - std::f64::consts::PI).abs() < 1e-12);
    }
}
