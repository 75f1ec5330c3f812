//! Explicit solutions of the zero-mass critical problem
//! `(-Δ)^s u = (|x|^{-4s} * u²) u`, `N > 4s`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::Choquard;
use crate::optimize::golden_min;
use crate::params::ProblemParams;
use crate::scalar::Real;
use crate::spectral::{ConvolutionMode, Field, Spectral};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BubbleSummary {
    pub c: f64,
    pub t: f64,
    /// `‖(-Δ)^s u - (K * u²)u‖ / ‖(-Δ)^s u‖`
    pub residual: f64,
    pub calibrated: bool,
}

/// `(ω = 0, p = 2, α = N - 4s)`, the parameters the bubbles solve.
pub fn bubble_params(dim: usize, s: f64) -> Result<ProblemParams> {
    let n = dim as f64;
    if n <= 4.0 * s {
        return Err(Error::DimensionTooSmall(format!("bubbles need N > 4s, got N = {dim}, s = {s}")));
    }
    ProblemParams::new(dim, s, n - 4.0 * s, 2.0, 0.0)
}

/// `(t / (t² + |x - x₀|²))^{(N-2s)/2}`
pub fn bubble_profile<T: Real>(grid: crate::spectral::Grid, s: f64, t: f64, x0: &[f64]) -> Field<T> {
    let e = (grid.dim() as f64 - 2.0 * s) / 2.0;
    Field::from_fn(grid, |x| {
        let d2: f64 = x.iter().zip(x0).map(|(a, b)| (a - b).powi(2)).sum();
        (t / (t * t + d2)).powf(e)
    })
}

/// Samples `C·profile` and returns it with its relative residual. Without
/// `c_opt`, `C` minimizes the residual by golden section on `log C ∈ [-6, 6]`.
pub fn make_bubble<T: Real>(
    spectral: &Spectral<T>,
    s: f64,
    t: f64,
    x0: &[f64],
    c_opt: Option<f64>,
) -> Result<(Field<T>, BubbleSummary)> {
    let grid = *spectral.grid();
    let params = bubble_params(grid.dim(), s)?;
    if !(t > 0.0) || x0.len() != grid.dim() {
        return Err(Error::OutOfRange("bubble centre or scale"));
    }
    let model = Choquard::new(spectral, params).with_mode(ConvolutionMode::FreeSpacePadded);
    let phi = bubble_profile::<T>(grid, s, t, x0);
    let lphi = spectral.fractional_laplacian(&phi, s)?;
    let nphi = model.nonlinear_term(&phi)?;
    let lnorm = lphi.norm().to_f64_lossy();
    // The residual of C·φ is ‖C Lφ - C³ Nφ‖ / ‖C Lφ‖ = ‖Lφ - C² Nφ‖ / ‖Lφ‖.
    let (ll, ln, nn) = (
        lphi.norm_sq().to_f64_lossy(),
        lphi.dot(&nphi).to_f64_lossy(),
        nphi.norm_sq().to_f64_lossy(),
    );
    let residual_at = |c: f64| {
        let c2 = c * c;
        (ll - 2.0 * c2 * ln + c2 * c2 * nn).max(0.0).sqrt() / lnorm
    };
    let (c, calibrated) = match c_opt {
        Some(c) => (c, false),
        None => (golden_min(|x| residual_at(x.exp()), -6.0, 6.0, 1e-12).exp(), true),
    };
    let field = phi.scaled(T::of(c));
    // direct evaluation rather than the expanded quadratic
    let residual = (&lphi.scaled(T::of(c)) - &nphi.scaled(T::of(c * c * c))).norm().to_f64_lossy()
        / (c.abs() * lnorm);
    Ok((field, BubbleSummary { c, t, residual, calibrated }))
}
