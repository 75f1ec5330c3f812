//! Energies, quotients, residuals and variations of the Choquard functional
//!
//! ```text
//! E_ω(u) = K/2 + ωM/2 - P/(2p),   K = ‖(-Δ)^{s/2}u‖²,  M = ‖u‖²,
//! P = ∫ (K_α * |u|^p) |u|^p
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::scalar::Real;
use crate::spectral::{ConvolutionMode, Field, Spectral};

/// The three integrals everything else is built from, plus derived values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValues {
    #[serde(rename = "K")]
    pub kinetic: f64,
    #[serde(rename = "M")]
    pub mass: f64,
    #[serde(rename = "P")]
    pub nonlocal: f64,
    pub e_omega: f64,
    pub e_zero: f64,
    pub s_quot: Option<f64>,
    /// Only defined for ω > 0.
    pub w_quot: Option<f64>,
    pub nehari_res: f64,
    pub pohozaev_res: f64,
}

impl FunctionalValues {
    /// Assembles every derived quantity from `K`, `M`, `P`.
    pub fn from_parts(kinetic: f64, mass: f64, nonlocal: f64, params: &ProblemParams) -> Self {
        let ProblemParams { s, alpha, p, omega, .. } = *params;
        let n = params.n();
        let e_zero = kinetic / 2.0 - nonlocal / (2.0 * p);
        let e_omega = e_zero + omega * mass / 2.0;

        let lhs = kinetic + omega * mass;
        let nehari_scale = lhs.abs().max(nonlocal.abs());
        let nehari_res = if nehari_scale > 0.0 { (lhs - nonlocal) / nehari_scale } else { 0.0 };

        let a = (n - 2.0 * s) * kinetic;
        let b = omega * n * mass;
        let c = (alpha + n) / p * nonlocal;
        let poho_scale = a.abs() + b.abs() + c.abs();
        let pohozaev_res = if poho_scale > 0.0 { (a + b - c) / poho_scale } else { 0.0 };

        let (s_quot, w_quot) = if nonlocal > 0.0 {
            let denom = nonlocal.powf(1.0 / p);
            let w = (omega > 0.0).then(|| {
                let sp2 = 2.0 * s * p;
                kinetic.powf(params.a_exponent() / sp2) * (omega * mass).powf(params.b_exponent() / sp2)
                    / denom
            });
            (Some(lhs / denom), w)
        } else {
            (None, None)
        };

        Self {
            kinetic,
            mass,
            nonlocal,
            e_omega,
            e_zero,
            s_quot,
            w_quot,
            nehari_res,
            pohozaev_res,
        }
    }

    /// Same integrals re-evaluated for other parameters (e.g. another ω).
    pub fn reparametrized(&self, params: &ProblemParams) -> Self {
        Self::from_parts(self.kinetic, self.mass, self.nonlocal, params)
    }

    pub fn is_finite(&self) -> bool {
        [
            self.kinetic,
            self.mass,
            self.nonlocal,
            self.e_omega,
            self.e_zero,
            self.nehari_res,
            self.pohozaev_res,
        ]
        .iter()
        .chain(self.s_quot.iter())
        .chain(self.w_quot.iter())
        .all(|v| v.is_finite())
    }
}

/// Multiplier of the mass constraint, `λ = (P - K)/ρ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagrangeMultiplier {
    pub lambda: f64,
}

impl LagrangeMultiplier {
    pub fn from_values(values: &FunctionalValues) -> Result<Self> {
        if values.mass <= 0.0 {
            return Err(Error::ZeroField);
        }
        Ok(Self { lambda: (values.nonlocal - values.kinetic) / values.mass })
    }
}

/// `sign(u)|u|^{p-1}`, with 0 at `u = 0`.
fn odd_power<T: Real>(u: T, p: T) -> T {
    if u == T::zero() {
        T::zero()
    } else {
        u.signum() * u.abs().powf(p - T::one())
    }
}

/// The functional for one parameter set on one grid.
#[derive(Clone, Copy)]
pub struct Choquard<'a, T: Real> {
    spectral: &'a Spectral<T>,
    params: ProblemParams,
    mode: ConvolutionMode,
}

impl<'a, T: Real> Choquard<'a, T> {
    pub fn new(spectral: &'a Spectral<T>, params: ProblemParams) -> Self {
        Self { spectral, params, mode: ConvolutionMode::default() }
    }

    pub fn with_mode(mut self, mode: ConvolutionMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_params(mut self, params: ProblemParams) -> Self {
        self.params = params;
        self
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn spectral(&self) -> &'a Spectral<T> {
        self.spectral
    }

    pub fn mode(&self) -> ConvolutionMode {
        self.mode
    }

    fn p(&self) -> T {
        T::of(self.params.p)
    }

    /// `|u|^p`
    fn density(&self, u: &Field<T>) -> Field<T> {
        let p = self.p();
        u.map(|v| v.abs().powf(p))
    }

    /// `K_α * |u|^p`
    pub fn potential(&self, u: &Field<T>) -> Result<Field<T>> {
        self.spectral
            .riesz_convolve(&self.density(u), self.params.alpha, self.mode)
    }

    /// `(K_α * |u|^p)|u|^{p-2}u`
    pub fn nonlinear_term(&self, u: &Field<T>) -> Result<Field<T>> {
        let p = self.p();
        let phi = self.potential(u)?;
        Ok(phi.zip_map(u, |f, v| f * odd_power(v, p)))
    }

    /// `‖(-Δ)^{s/2}u‖²` by Parseval.
    pub fn kinetic(&self, u: &Field<T>) -> Result<f64> {
        let symbol = self.spectral.fractional_symbol(self.params.s)?;
        let spectrum = self.spectral.forward(u)?;
        let grid = self.spectral.grid();
        let sum: f64 = spectrum
            .iter()
            .zip(symbol.iter())
            .map(|(c, m)| m.to_f64_lossy() * c.norm_sqr().to_f64_lossy())
            .sum();
        Ok(sum * grid.cell_volume() / grid.len() as f64)
    }

    /// `P(u)`
    pub fn nonlocal(&self, u: &Field<T>) -> Result<f64> {
        let rho = self.density(u);
        let phi = self
            .spectral
            .riesz_convolve(&rho, self.params.alpha, self.mode)?;
        Ok(phi.dot(&rho).to_f64_lossy())
    }

    pub fn suite(&self, u: &Field<T>) -> Result<FunctionalValues> {
        let kinetic = self.kinetic(u)?;
        let mass = u.norm_sq().to_f64_lossy();
        let nonlocal = self.nonlocal(u)?;
        Ok(FunctionalValues::from_parts(kinetic, mass, nonlocal, &self.params))
    }

    pub fn energy(&self, u: &Field<T>) -> Result<f64> {
        Ok(self.suite(u)?.e_omega)
    }

    /// `S(u)`; fails on the zero field.
    pub fn s_quotient(&self, u: &Field<T>) -> Result<f64> {
        self.suite(u)?.s_quot.ok_or(Error::ZeroField)
    }

    /// `W(u)`; fails on the zero field and for ω = 0.
    pub fn w_quotient(&self, u: &Field<T>) -> Result<f64> {
        self.params.require_massive()?;
        self.suite(u)?.w_quot.ok_or(Error::ZeroField)
    }

    /// `(-Δ)^s u + ωu - N(u)`, the gradient of `E_ω`.
    pub fn first_variation(&self, u: &Field<T>) -> Result<Field<T>> {
        self.first_variation_at(u, self.params.omega)
    }

    /// Gradient with `ω` replaced by `lambda`.
    pub fn first_variation_at(&self, u: &Field<T>, lambda: f64) -> Result<Field<T>> {
        let mut g = self.spectral.fractional_laplacian(u, self.params.s)?;
        g.axpy(T::of(lambda), u);
        g.axpy(-T::one(), &self.nonlinear_term(u)?);
        Ok(g)
    }

    /// Second variation at `u` with multiplier `lambda`.
    pub fn hessian(&self, u: &Field<T>, lambda: f64) -> Result<Hessian<'a, T>> {
        let p = self.params.p;
        if p < 2.0 {
            return Err(Error::PNotC2(p));
        }
        let pt = self.p();
        let two = T::of(2.0);
        let weight = u.map(|v| odd_power(v, pt));
        let phi = self.potential(u)?;
        let potential = phi.zip_map(u, |f, v| f * v.abs().powf(pt - two));
        Ok(Hessian {
            spectral: self.spectral,
            s: self.params.s,
            alpha: self.params.alpha,
            p,
            lambda,
            mode: self.mode,
            weight,
            potential,
        })
    }
}

/// `H ξ = (-Δ)^s ξ + λξ - p (K_α * (wξ)) w - (p-1) V ξ` with
/// `w = |u|^{p-2}u` and `V = (K_α * |u|^p)|u|^{p-2}`.
pub struct Hessian<'a, T: Real> {
    spectral: &'a Spectral<T>,
    s: f64,
    alpha: f64,
    p: f64,
    lambda: f64,
    mode: ConvolutionMode,
    weight: Field<T>,
    potential: Field<T>,
}

impl<T: Real> Hessian<'_, T> {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn grid(&self) -> &crate::spectral::Grid {
        self.spectral.grid()
    }

    pub fn apply(&self, xi: &Field<T>) -> Result<Field<T>> {
        let mut out = self.spectral.fractional_laplacian(xi, self.s)?;
        out.axpy(T::of(self.lambda), xi);
        let wx = self.weight.zip_map(xi, |w, x| w * x);
        let conv = self.spectral.riesz_convolve(&wx, self.alpha, self.mode)?;
        let p = T::of(self.p);
        let q = T::of(self.p - 1.0);
        let w = self.weight.values();
        let v = self.potential.values();
        for (((o, c), x), (wi, vi)) in out
            .values_mut()
            .iter_mut()
            .zip(conv.values())
            .zip(xi.values())
            .zip(w.iter().zip(v))
        {
            *o = *o - p * *c * *wi - q * *vi * *x;
        }
        Ok(out)
    }

    /// The same operator with the nonlinear part removed.
    pub fn linear_part(&self) -> Self {
        Self {
            spectral: self.spectral,
            s: self.s,
            alpha: self.alpha,
            p: self.p,
            lambda: self.lambda,
            mode: self.mode,
            weight: Field::zeros(*self.weight.grid()),
            potential: Field::zeros(*self.potential.grid()),
        }
    }
}

/// Free-function form of [`Hessian::apply`].
pub fn hessian_apply<T: Real>(
    model: &Choquard<'_, T>,
    u: &Field<T>,
    lambda: f64,
    xi: &Field<T>,
) -> Result<Field<T>> {
    model.hessian(u, lambda)?.apply(xi)
}
