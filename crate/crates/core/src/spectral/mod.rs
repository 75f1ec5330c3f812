//! Periodic grid, Fourier multipliers, and free-space Riesz convolution.
//!
//! Fourier convention: `û(ξ) = ∫ u(x) e^{-iξ·x} dx`, so `(-Δ)^s` has symbol
//! `|ξ|^{2s}` and convolution with `|x|^{α-N}` has symbol `γ(α)|ξ|^{-α}`.

mod fft;
mod field;
mod grid;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_lr};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use field::Field;
pub use grid::{Grid, DEFAULT_ELEMENT_CAP};

use fft::FftNd;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum ConvolutionMode {
    /// Symbol `γ(α)|ξ|^{-α}` on the box, zero mode dropped.
    PeriodicMultiplier,
    /// Aperiodic convolution on a grid doubled along every axis.
    #[default]
    FreeSpacePadded,
}

/// `γ(α) = π^{N/2} 2^α Γ(α/2) / Γ((N-α)/2)`, the Fourier symbol constant of
/// the Riesz kernel `|x|^{α-N}`.
pub fn riesz_constant(dim: usize, alpha: f64) -> f64 {
    let n = dim as f64;
    std::f64::consts::PI.powf(n / 2.0) * 2f64.powf(alpha) * gamma(alpha / 2.0)
        / gamma((n - alpha) / 2.0)
}

/// Product of the splitting width and the grid spacing for the free-space
/// kernel. Aliasing of the smooth part is `~exp(-π²/0.25)`.
const SPLIT_WIDTH_TIMES_H: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum SymbolKey {
    FractionalLaplacian(u64),
    Riesz(ConvolutionMode, u64),
}

/// Transform plans and cached symbols for one grid.
///
/// Shareable across threads; symbols are computed on first use.
pub struct Spectral<T: Real> {
    grid: Grid,
    fft: FftNd<T>,
    padded: OnceLock<(Grid, FftNd<T>)>,
    norms: Vec<usize>,
    symbols: Mutex<HashMap<SymbolKey, Arc<Vec<T>>>>,
}

impl<T: Real> Spectral<T> {
    pub fn new(grid: Grid) -> Self {
        Self {
            grid,
            fft: FftNd::new(grid.dim(), grid.points_per_dim()),
            padded: OnceLock::new(),
            norms: lattice_norms(&grid),
            symbols: Mutex::new(HashMap::new()),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn check(&self, u: &Field<T>) -> Result<()> {
        if *u.grid() == self.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    fn padded(&self) -> &(Grid, FftNd<T>) {
        self.padded.get_or_init(|| {
            let g = self.grid.doubled();
            let fft = FftNd::new(g.dim(), g.points_per_dim());
            (g, fft)
        })
    }

    fn symbol(&self, key: SymbolKey, build: impl FnOnce() -> Vec<T>) -> Arc<Vec<T>> {
        if let Some(s) = self.symbols.lock().unwrap().get(&key) {
            return s.clone();
        }
        let s = Arc::new(build());
        self.symbols.lock().unwrap().insert(key, s.clone());
        s
    }

    /// `|ξ|^2` per lattice norm `m = Σ k_a^2`.
    fn xi_sq(&self, m: usize) -> f64 {
        let dk = self.grid.frequency_step();
        dk * dk * m as f64
    }

    /// Multiplies the spectrum of `u` by a real even symbol.
    pub fn apply_symbol(&self, u: &Field<T>, symbol: &[T]) -> Result<Field<T>> {
        self.check(u)?;
        let mut buf = to_complex(u.values());
        self.fft.forward(&mut buf);
        buf.par_iter_mut()
            .zip(symbol.par_iter())
            .for_each(|(c, &m)| *c = *c * m);
        self.fft.inverse(&mut buf);
        Ok(Field::from_raw(self.grid, real_part_checked(&buf)?))
    }

    /// `|ξ|^{2 s2}` on the grid; the zero mode is 0 for `s2 > 0`.
    pub fn fractional_symbol(&self, s2: f64) -> Result<Arc<Vec<T>>> {
        if !(0.0..=2.0).contains(&s2) {
            return Err(Error::OutOfRange("s2"));
        }
        Ok(self.symbol(SymbolKey::FractionalLaplacian(s2.to_bits()), || {
            let table = radial_table(&self.norms, |m| {
                if s2 == 0.0 {
                    1.0
                } else {
                    self.xi_sq(m).powf(s2)
                }
            });
            table.iter().map(|&v| T::of(v)).collect()
        }))
    }

    /// `(-Δ)^{s2} u` by its Fourier symbol.
    pub fn fractional_laplacian(&self, u: &Field<T>, s2: f64) -> Result<Field<T>> {
        let symbol = self.fractional_symbol(s2)?;
        self.apply_symbol(u, &symbol)
    }

    /// `K_α * g` with `K_α(x) = |x|^{α-N}`.
    pub fn riesz_convolve(&self, g: &Field<T>, alpha: f64, mode: ConvolutionMode) -> Result<Field<T>> {
        self.check(g)?;
        let dim = self.grid.dim();
        if !(alpha > 0.0 && alpha < dim as f64) {
            return Err(Error::AlphaOutOfRange(alpha));
        }
        match mode {
            ConvolutionMode::PeriodicMultiplier => {
                let symbol = self.symbol(SymbolKey::Riesz(mode, alpha.to_bits()), || {
                    let c = riesz_constant(dim, alpha);
                    let table = radial_table(&self.norms, |m| {
                        if m == 0 {
                            0.0
                        } else {
                            c * self.xi_sq(m).powf(-alpha / 2.0)
                        }
                    });
                    table.iter().map(|&v| T::of(v)).collect()
                });
                self.apply_symbol(g, &symbol)
            }
            ConvolutionMode::FreeSpacePadded => {
                let symbol = self.symbol(SymbolKey::Riesz(mode, alpha.to_bits()), || {
                    free_space_symbol(&self.padded().0, alpha)
                });
                let (pg, pfft) = self.padded();
                let mut buf = embed(&self.grid, pg, g.values());
                pfft.forward(&mut buf);
                buf.par_iter_mut()
                    .zip(symbol.par_iter())
                    .for_each(|(c, &m)| *c = *c * m);
                pfft.inverse(&mut buf);
                let full = real_part_checked(&buf)?;
                Ok(Field::from_raw(self.grid, crop(&self.grid, pg, &full)))
            }
        }
    }

    /// `((-Δ)^s + ω)^{-1} g`. With `ω = 0` the mean of `g` must vanish.
    pub fn resolvent(&self, g: &Field<T>, s: f64, omega: f64) -> Result<Field<T>> {
        self.check(g)?;
        if !(omega >= 0.0) || !(s > 0.0) {
            return Err(Error::OutOfRange("omega"));
        }
        if omega == 0.0 {
            let volume = (2.0 * self.grid.half_width()).powi(self.grid.dim() as i32);
            let mean = g.integral().to_f64_lossy() / volume;
            let zero_mode_norm = mean.abs() * volume.sqrt();
            let tol = 1e-12f64.max(10.0 * T::epsilon().to_f64_lossy());
            if zero_mode_norm > tol * g.norm().to_f64_lossy() {
                return Err(Error::SingularResolvent);
            }
        }
        let table = radial_table(&self.norms, |m| {
            if m == 0 && omega == 0.0 {
                0.0
            } else {
                1.0 / (self.xi_sq(m).powf(s) + omega)
            }
        });
        let symbol: Vec<T> = table.iter().map(|&v| T::of(v)).collect();
        self.apply_symbol(g, &symbol)
    }

    /// Spectral `∂u/∂x_axis`; the Nyquist mode is dropped to keep the result real.
    pub fn derivative(&self, u: &Field<T>, axis: usize) -> Result<Field<T>> {
        self.check(u)?;
        let g = self.grid;
        if axis >= g.dim() {
            return Err(Error::InvalidOption(format!("axis {axis} out of range")));
        }
        let n = g.points_per_dim();
        let dk = g.frequency_step();
        let inner = n.pow((g.dim() - 1 - axis) as u32);
        let mut buf = to_complex(u.values());
        self.fft.forward(&mut buf);
        buf.par_iter_mut().enumerate().for_each(|(flat, c)| {
            let k = (flat / inner) % n;
            let w = g.wavenumber(k);
            if k == n / 2 {
                *c = Complex::new(T::zero(), T::zero());
            } else {
                let xi = T::of(w as f64 * dk);
                *c = Complex::new(-c.im * xi, c.re * xi);
            }
        });
        self.fft.inverse(&mut buf);
        Ok(Field::from_raw(g, real_part_checked(&buf)?))
    }

    /// Forward transform of a real field (unnormalized DFT).
    pub fn forward(&self, u: &Field<T>) -> Result<Vec<Complex<T>>> {
        self.check(u)?;
        let mut buf = to_complex(u.values());
        self.fft.forward(&mut buf);
        Ok(buf)
    }

    /// Inverse of [`Spectral::forward`], with the realness guard.
    pub fn inverse(&self, mut spectrum: Vec<Complex<T>>) -> Result<Field<T>> {
        if spectrum.len() != self.grid.len() {
            return Err(Error::GridMismatch);
        }
        self.fft.inverse(&mut spectrum);
        Ok(Field::from_raw(self.grid, real_part_checked(&spectrum)?))
    }
}

/// Integer squared norm of the signed wavenumber (equivalently, periodic
/// offset) index at every flat position.
fn lattice_norms(g: &Grid) -> Vec<usize> {
    let n = g.points_per_dim();
    let axis: Vec<usize> = (0..n)
        .map(|k| {
            let w = g.wavenumber(k);
            (w * w) as usize
        })
        .collect();
    let mut out = vec![0usize; g.len()];
    let mut idx = vec![0; g.dim()];
    for (flat, o) in out.iter_mut().enumerate() {
        g.unravel(flat, &mut idx);
        *o = idx.iter().map(|&i| axis[i]).sum();
    }
    out
}

/// Evaluates `f(m)` at every entry of `norms`, once per distinct `m` when the
/// norms are dense enough to tabulate.
fn radial_table(norms: &[usize], f: impl Fn(usize) -> f64 + Sync + Send) -> Vec<f64> {
    let max = norms.iter().copied().max().unwrap_or(0);
    if max <= 4 * norms.len() {
        let table: Vec<f64> = (0..=max).into_par_iter().map(&f).collect();
        norms.iter().map(|&m| table[m]).collect()
    } else {
        norms.par_iter().map(|&m| f(m)).collect()
    }
}

/// Symbol of the aperiodic Riesz convolution on the doubled grid.
///
/// The kernel is split as `|x|^{α-N} = K_long + K_short` with a Gaussian
/// splitting of width `η`. `K_long` is smooth and sampled in real space, so
/// its discrete convolution is spectrally accurate; `K_short` decays like a
/// Gaussian and enters through its exact Fourier transform
/// `γ(α)|ξ|^{-α} P(α/2, |ξ|²/4η²)`.
fn free_space_symbol<T: Real>(pg: &Grid, alpha: f64) -> Vec<T> {
    let dim = pg.dim();
    let n = dim as f64;
    let h = pg.spacing();
    let eta = SPLIT_WIDTH_TIMES_H / h;
    let a = (n - alpha) / 2.0;
    let norms = lattice_norms(pg);

    let origin_value = eta.powf(n - alpha) / gamma(a + 1.0);
    let long_table = radial_table(&norms, |m| {
        if m == 0 {
            origin_value
        } else {
            let r2 = h * h * m as f64;
            r2.powf((alpha - n) / 2.0) * gamma_lr(a, eta * eta * r2)
        }
    });
    let mut kernel: Vec<Complex<f64>> = long_table
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .collect();
    FftNd::<f64>::new(dim, pg.points_per_dim()).forward(&mut kernel);

    let c = riesz_constant(dim, alpha);
    let dk = pg.frequency_step();
    let zero_value = c / ((2.0 * eta).powf(alpha) * gamma(alpha / 2.0 + 1.0));
    let short_table = radial_table(&norms, |m| {
        if m == 0 {
            zero_value
        } else {
            let xi2 = dk * dk * m as f64;
            c * xi2.powf(-alpha / 2.0) * gamma_lr(alpha / 2.0, xi2 / (4.0 * eta * eta))
        }
    });
    let vol = pg.cell_volume();
    kernel
        .iter()
        .zip(&short_table)
        .map(|(k, &short)| T::of(k.re * vol + short))
        .collect()
}

fn to_complex<T: Real>(values: &[T]) -> Vec<Complex<T>> {
    values.iter().map(|&v| Complex::new(v, T::zero())).collect()
}

fn imaginary_tolerance<T: Real>() -> f64 {
    1e-10f64.max(1e3 * T::epsilon().to_f64_lossy())
}

/// Drops imaginary parts, failing if they carry more than the roundoff budget.
fn real_part_checked<T: Real>(buf: &[Complex<T>]) -> Result<Vec<T>> {
    let (re2, im2) = buf.iter().fold((0.0f64, 0.0f64), |(r, i), c| {
        let (a, b) = (c.re.to_f64_lossy(), c.im.to_f64_lossy());
        (r + a * a, i + b * b)
    });
    let ratio = if re2 > 0.0 { (im2 / re2).sqrt() } else { im2.sqrt() };
    if ratio > imaginary_tolerance::<T>() && im2.sqrt() > f64::MIN_POSITIVE {
        return Err(Error::ImaginaryLeak(ratio));
    }
    Ok(buf.iter().map(|c| c.re).collect())
}

/// Padded-grid positions of one point of the original grid.
///
/// The periodic point at `x = -L` stands for both `-L` and `+L`; it is split
/// evenly between the two, so the padded operator keeps the reflection
/// symmetry `x → -x` of the periodic grid. Returns the image count.
fn images(g: &Grid, pg: &Grid, flat: usize, idx: &mut [usize], out: &mut Vec<usize>) -> usize {
    let n = g.points_per_dim();
    let off = n / 2;
    g.unravel(flat, idx);
    let edges: Vec<usize> = (0..idx.len()).filter(|&a| idx[a] == 0).collect();
    idx.iter_mut().for_each(|i| *i += off);
    out.clear();
    for mask in 0..(1usize << edges.len()) {
        let mut at = idx.to_vec();
        for (bit, &a) in edges.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                at[a] += n;
            }
        }
        out.push(pg.ravel(&at));
    }
    out.len()
}

/// Places a field in the centre of the doubled grid, zero elsewhere.
fn embed<T: Real>(g: &Grid, pg: &Grid, values: &[T]) -> Vec<Complex<T>> {
    let mut out = vec![Complex::new(T::zero(), T::zero()); pg.len()];
    let mut idx = vec![0; g.dim()];
    let mut at = Vec::new();
    for (flat, &v) in values.iter().enumerate() {
        let count = images(g, pg, flat, &mut idx, &mut at);
        let share = v / T::of(count as f64);
        for &k in &at {
            out[k] = Complex::new(share, T::zero());
        }
    }
    out
}

/// Adjoint of [`embed`]: images of a boundary point are averaged.
fn crop<T: Real>(g: &Grid, pg: &Grid, full: &[T]) -> Vec<T> {
    let mut idx = vec![0; g.dim()];
    let mut at = Vec::new();
    (0..g.len())
        .map(|flat| {
            let count = images(g, pg, flat, &mut idx, &mut at);
            if count == 1 {
                full[at[0]]
            } else {
                at.iter().map(|&k| full[k]).sum::<T>() / T::of(count as f64)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests;
