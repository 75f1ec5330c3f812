//! Certificates for candidate solutions: functionals, residuals, scaling
//! identities, Morse spectrum, decay, and a few closed-form checks.

mod bubble;
mod decay;
mod morse;
mod scaling;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{Choquard, FunctionalValues};
use crate::params::ProblemParams;
use crate::scalar::Real;
use crate::solvers::{Projector, SymmetrySpec};
use crate::spectral::Field;

pub use bubble::{bubble_params, bubble_profile, make_bubble, BubbleSummary};
pub use decay::{default_window, fit_decay_exponent, shell_csv, shell_profile, DecayFit, Shell};
pub use morse::{hessian_spectrum, lowest_eigenpairs, morse_spectrum, Eigenpairs, MorseData, MorseOptions};
pub use scaling::{
    dilation_min_gap, energy_ray_gap, mass_critical_gap, mass_subcritical_min_gap,
    mass_supercritical_gap, scaling_report, w_invariance_gap, ScalingReport,
};

/// What was held fixed when the candidate was produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Normalization {
    /// Frequency `ω` of `(-Δ)^s u + ωu = N(u)`.
    Frequency(f64),
    /// Mass `ρ = ‖u‖`; the frequency is the multiplier `(P-K)/ρ²`.
    Mass(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct CertifyOptions {
    /// Compute the lowest part of the Hessian spectrum (needs `p ≥ 2`).
    pub morse: Option<MorseOptions>,
    /// Fit a power-law tail on this radial window.
    pub decay_window: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub params: ProblemParams,
    pub normalization: Normalization,
    /// Functionals with `ω` set to `lambda`.
    pub functionals: FunctionalValues,
    pub lambda: f64,
    pub rho: f64,
    /// Gradient `(-Δ)^s u + λu - N(u)` relative to `‖u‖`.
    pub gradient_res: f64,
    pub morse: Option<MorseData>,
    pub decay: Option<DecayFit>,
    /// `‖u - Rad u‖ / ‖u‖` after recentring.
    pub symmetry_deviation: f64,
    pub scaling: ScalingReport,
}

impl Certificate {
    /// Largest of the Nehari, Pohozaev and gradient residuals.
    pub fn worst_residual(&self) -> f64 {
        self.functionals
            .nehari_res
            .abs()
            .max(self.functionals.pohozaev_res.abs())
            .max(self.gradient_res)
    }
}

/// Evaluates every check on `u`.
pub fn certify<T: Real>(
    model: &Choquard<'_, T>,
    u: &Field<T>,
    normalization: Normalization,
    opts: &CertifyOptions,
) -> Result<Certificate> {
    if u.is_zero() {
        return Err(Error::ZeroField);
    }
    if !u.is_finite() {
        return Err(Error::InvalidField("non-finite values".into()));
    }
    let params = *model.params();
    let base = model.suite(u)?;
    let lambda = match normalization {
        Normalization::Frequency(omega) => omega,
        Normalization::Mass(_) => (base.nonlocal - base.kinetic) / base.mass,
    };
    // negative multipliers only arise far from solutions; evaluate at ω = 0
    let effective = params.with_omega(lambda.max(0.0))?;
    let functionals = base.reparametrized(&effective);
    let gradient_res = model
        .first_variation_at(u, lambda)?
        .norm()
        .to_f64_lossy()
        / base.mass.sqrt();

    let grid = *u.grid();
    let centred = if u.argmax() == grid.origin_index() { u.clone() } else { u.recentered() };
    let symmetry_deviation = Projector::new(grid, SymmetrySpec::Radial)?.deviation(&centred)?;
    let scaling = scaling_report(&functionals, &effective)?;
    let morse = match opts.morse {
        Some(m) if params.p >= 2.0 => Some(morse_spectrum(model, u, lambda, &m)?),
        _ => None,
    };
    let decay = opts
        .decay_window
        .map(|w| fit_decay_exponent(&centred.sign_normalized(), w))
        .transpose()?;

    let cert = Certificate {
        params,
        normalization,
        functionals,
        lambda,
        rho: base.mass.sqrt(),
        gradient_res,
        morse,
        decay,
        symmetry_deviation,
        scaling,
    };
    if !(cert.functionals.is_finite() && cert.gradient_res.is_finite()) {
        return Err(Error::InvalidField("non-finite functionals".into()));
    }
    Ok(cert)
}

/// Residual level above which a certificate is not taken as a solution.
pub const SOLUTION_TOLERANCE: f64 = 1e-4;

/// Only the residuals a discrete solution satisfies exactly are checked; the
/// Pohozaev residual also measures truncation of the tail by the box.
fn require_solution(cert: &Certificate, what: &str) -> Result<()> {
    let res = cert.gradient_res.max(cert.functionals.nehari_res.abs());
    if !(res <= SOLUTION_TOLERANCE) {
        return Err(Error::NotConverged(format!("{what}: residual {res:e} above {SOLUTION_TOLERANCE:e}")));
    }
    Ok(())
}

/// Consistency of a constrained minimizer (`cert_sigma`, mass `ρ`) with a
/// free solution (`cert_nehari`, frequency `ω`) of the same mass:
///
/// ```text
/// ρ² = (N+α-(N-2s)p) / (ωs(p-1)) · c,    m + ωρ²/2 = c
/// ```
///
/// with `m` the constrained minimum of `E_0` and `c` the energy `E_ω` of the
/// free solution. Returns the larger relative gap.
pub fn rho_energy_check(
    cert_sigma: &Certificate,
    cert_nehari: &Certificate,
    params: &ProblemParams,
) -> Result<f64> {
    let omega = match cert_nehari.normalization {
        Normalization::Frequency(w) if w > 0.0 => w,
        _ => return Err(Error::NotConverged("free run must be at a fixed positive frequency".into())),
    };
    let rho = match cert_sigma.normalization {
        Normalization::Mass(r) => r,
        _ => return Err(Error::NotConverged("constrained run must be at a fixed mass".into())),
    };
    let same = |a: &ProblemParams| {
        a.dim == params.dim && a.s == params.s && a.alpha == params.alpha && a.p == params.p
    };
    if !same(&cert_sigma.params) || !same(&cert_nehari.params) || params.omega != omega {
        return Err(Error::NotConverged("certificates belong to different parameters".into()));
    }
    if (cert_nehari.rho - rho).abs() > 1e-6 * rho {
        return Err(Error::NotConverged(format!(
            "masses differ: constrained ρ = {rho}, free ρ = {}",
            cert_nehari.rho
        )));
    }
    require_solution(cert_sigma, "constrained run")?;
    require_solution(cert_nehari, "free run")?;
    let m = cert_sigma.functionals.e_zero;
    let c = cert_nehari.functionals.e_omega;
    let coeff = params.b_exponent() / (omega * params.s * (params.p - 1.0));
    let rho2 = rho * rho;
    let first = (rho2 - coeff * c).abs() / rho2;
    let second = (m + omega * rho2 / 2.0 - c).abs() / c.abs();
    Ok(first.max(second))
}

/// Sharp constant of `P ≤ C K^{βp} M^{(1-β)p}`, `β = (Np-N-α)/(2sp)`, from a
/// ground state: `C = ω^{B/(2s)} / W^p`.
pub fn estimate_gn_constant(ground: &Certificate) -> Result<f64> {
    require_solution(ground, "ground state")?;
    let params = ground.params.with_omega(ground.lambda)?;
    params.require_massive()?;
    let w = ground.functionals.w_quot.ok_or(Error::ZeroField)?;
    Ok(params.omega.powf(params.b_exponent() / (2.0 * params.s)) / w.powf(params.p))
}

/// `P / (K^{βp} M^{(1-β)p})` for any field's integrals.
pub fn gn_quotient(values: &FunctionalValues, params: &ProblemParams) -> f64 {
    let two_s = 2.0 * params.s;
    values.nonlocal
        / (values.kinetic.powf(params.a_exponent() / two_s)
            * values.mass.powf(params.b_exponent() / two_s))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// Only the trivial solution can satisfy both identities.
    Nonexistence,
    ExistenceWindow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstruction {
    /// Coefficient of `K` after eliminating `P`: `N - 2s - (α+N)/p`.
    pub c1: f64,
    /// Coefficient of `ωM`: `N - (α+N)/p`.
    pub c2: f64,
    pub verdict: Verdict,
}

/// Combining the Nehari and Pohozaev identities gives
/// `c₁ K + c₂ ωM = 0`; equal signs force `u = 0`.
///
/// The coefficients are evaluated as `((N-2s)/p)(p - p_high)` and
/// `(N/p)(p - p_low)`, so their signs agree exactly with the thresholds.
pub fn pohozaev_obstruction(params: &ProblemParams) -> Result<Obstruction> {
    let t = params.thresholds()?;
    let (n, s) = (params.n(), params.s);
    let p = t.snap(params.p);
    let c1 = (n - 2.0 * s) / p * (p - t.p_high);
    let c2 = n / p * (p - t.p_low);
    let verdict = if (c1 >= 0.0 && c2 >= 0.0) || (c1 <= 0.0 && c2 <= 0.0) {
        Verdict::Nonexistence
    } else {
        Verdict::ExistenceWindow
    };
    Ok(Obstruction { c1, c2, verdict })
}
