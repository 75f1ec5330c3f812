//! Normalized gradient flow for the constrained minimization of `E_0` on
//! the sphere `‖u‖ = ρ`.
//!
//! Each step is the semi-implicit update
//!
//! ```text
//! u* = (1 + dt((-Δ)^s + λ_k))^{-1} (u + dt N(u)),   u ← ρ u*/‖u*‖
//! ```
//!
//! with `λ_k = max((P-K)/ρ², 0)` the current multiplier. Without the shift
//! the fixed points solve `(-Δ)^s u + (1/dt)(1-c)u = cN(u)` for some `c`,
//! which is only the Euler-Lagrange equation as `dt → 0`; with it, `c = 1`
//! at every fixed point.

use crate::analysis::{certify, CertifyOptions, Normalization};
use crate::error::{Error, Result};
use crate::functionals::Choquard;
use crate::params::{classify_regime, RegimeTag};
use crate::scalar::Real;
use crate::spectral::Field;

use super::{
    flags_for, initial_guess, normalize_pose, HistoryEntry, Projector, SolveReport, SolverKind,
    SolverOptions, Termination,
};

/// Energy increases below this relative size are treated as round-off.
const ENERGY_SLACK: f64 = 1e-13;
/// Steps before the energy is required to decrease.
const STARTUP: usize = 10;
/// Smallest step, relative to the requested one, before giving up.
const MIN_DT_FACTOR: f64 = 1e-8;

struct State<T: Real> {
    u: Field<T>,
    lu: Field<T>,
    nu: Field<T>,
    kinetic: f64,
    nonlocal: f64,
    energy: f64,
}

fn evaluate<T: Real>(model: &Choquard<'_, T>, u: Field<T>) -> Result<State<T>> {
    let lu = model.spectral().fractional_laplacian(&u, model.params().s)?;
    let nu = model.nonlinear_term(&u)?;
    let kinetic = lu.dot(&u).to_f64_lossy();
    let nonlocal = nu.dot(&u).to_f64_lossy();
    let energy = kinetic / 2.0 - nonlocal / (2.0 * model.params().p);
    Ok(State { u, lu, nu, kinetic, nonlocal, energy })
}

fn with_mass<T: Real>(mut u: Field<T>, rho: f64) -> Result<Field<T>> {
    let norm = u.norm().to_f64_lossy();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::ZeroField);
    }
    u.scale(T::of(rho / norm));
    Ok(u)
}

pub fn solve_ground_state_ngf<T: Real>(
    model: &Choquard<'_, T>,
    rho: f64,
    opts: &SolverOptions,
) -> Result<SolveReport<T>> {
    let init = initial_guess(*model.spectral().grid(), opts);
    solve_ground_state_ngf_from(model, rho, init, opts)
}

pub fn solve_ground_state_ngf_from<T: Real>(
    model: &Choquard<'_, T>,
    rho: f64,
    init: Field<T>,
    opts: &SolverOptions,
) -> Result<SolveReport<T>> {
    opts.validate()?;
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::OutOfRange("rho"));
    }
    let params = *model.params();
    let regime = classify_regime(&params)?;
    if regime.tag != RegimeTag::MassSubcritical {
        return Err(Error::RegimeUnsupported(regime.tag));
    }
    let grid = *model.spectral().grid();
    let flags = flags_for(grid.dim(), opts.symmetry)?;
    let projector = opts.symmetry.map(|s| Projector::new(grid, s)).transpose()?;
    let project = |u: &Field<T>| match &projector {
        Some(p) => p.apply(u),
        None => Ok(u.clone()),
    };
    let rho2 = rho * rho;
    let s = params.s;

    let mut state = evaluate(model, with_mass(project(&init)?, rho)?)?;
    let mut dt = opts.dt;
    let mut history = Vec::new();
    let mut iteration = 0;
    let mut message = None;
    let termination = loop {
        let lambda = (state.nonlocal - state.kinetic) / rho2;
        let mut grad = &state.lu - &state.nu;
        grad.axpy(T::of(lambda), &state.u);
        let residual = grad.norm().to_f64_lossy() / rho;
        history.push(HistoryEntry { iteration, energy: state.energy, residual });
        if !residual.is_finite() || !state.energy.is_finite() {
            message = Some(format!("non-finite iterate at step {iteration}"));
            break Termination::Diverged;
        }
        if residual < opts.tol {
            break Termination::Converged;
        }
        if iteration >= opts.max_iter {
            break Termination::MaxIter;
        }

        let shift = lambda.max(0.0);
        let next = loop {
            let mut rhs = state.u.clone();
            rhs.axpy(T::of(dt), &state.nu);
            let stepped = model
                .spectral()
                .resolvent(&rhs, s, shift + 1.0 / dt)?
                .scaled(T::of(1.0 / dt));
            let candidate = evaluate(model, with_mass(project(&stepped)?, rho)?)?;
            let rise = candidate.energy - state.energy;
            let allowed = ENERGY_SLACK * state.energy.abs().max(f64::MIN_POSITIVE);
            if iteration < STARTUP || rise <= allowed || !candidate.energy.is_finite() {
                break Some(candidate);
            }
            dt *= 0.5;
            if dt < opts.dt * MIN_DT_FACTOR {
                break None;
            }
        };
        match next {
            Some(next) => state = next,
            None => {
                message = Some(format!("energy kept increasing down to dt = {dt:e}"));
                break Termination::Diverged;
            }
        }
        iteration += 1;
    };

    let lambda = (state.nonlocal - state.kinetic) / rho2;
    let field = if termination == Termination::Converged {
        normalize_pose(state.u, opts.symmetry)
    } else {
        state.u
    };
    let certificate = if field.is_finite() {
        Some(certify(model, &field, Normalization::Mass(rho), &CertifyOptions::default())?)
    } else {
        None
    };
    Ok(SolveReport {
        field,
        solver: SolverKind::Ngf,
        iterations: iteration,
        history,
        termination,
        message,
        lambda,
        rho,
        dt: Some(dt),
        symmetry: opts.symmetry,
        flags,
        certificate,
    })
}
