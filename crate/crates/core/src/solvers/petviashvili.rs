//! Petviashvili iteration for `(-Δ)^s u + ωu = N(u)`.

use crate::analysis::{certify, CertifyOptions, Normalization};
use crate::error::{Error, Result};
use crate::functionals::Choquard;
use crate::params::classify_regime;
use crate::scalar::Real;
use crate::spectral::Field;

use super::{
    flags_for, initial_guess, normalize_pose, HistoryEntry, Projector, SolveReport, SolverKind,
    SolverOptions, Termination,
};

/// Stabilizing exponent `q/(q-1)` for a nonlinearity homogeneous of degree
/// `q = 2p - 1`.
pub fn petviashvili_exponent(p: f64) -> f64 {
    (2.0 * p - 1.0) / (2.0 * p - 2.0)
}

pub fn solve_petviashvili<T: Real>(
    model: &Choquard<'_, T>,
    opts: &SolverOptions,
) -> Result<SolveReport<T>> {
    let init = initial_guess(*model.spectral().grid(), opts);
    solve_petviashvili_from(model, init, opts)
}

pub fn solve_petviashvili_from<T: Real>(
    model: &Choquard<'_, T>,
    init: Field<T>,
    opts: &SolverOptions,
) -> Result<SolveReport<T>> {
    opts.validate()?;
    let params = *model.params();
    params.require_massive()?;
    let regime = classify_regime(&params)?;
    if !regime.tag.in_existence_window() {
        return Err(Error::RegimeUnsupported(regime.tag));
    }
    let grid = *model.spectral().grid();
    let flags = flags_for(grid.dim(), opts.symmetry)?;
    let projector = opts.symmetry.map(|s| Projector::new(grid, s)).transpose()?;
    let project = |u: &Field<T>| match &projector {
        Some(p) => p.apply(u),
        None => Ok(u.clone()),
    };
    let (s, omega, p) = (params.s, params.omega, params.p);
    let gamma = petviashvili_exponent(p);

    let mut u = project(&init)?;
    if u.is_zero() {
        return Err(Error::ZeroField);
    }
    let mut history = Vec::new();
    let mut iteration = 0;
    let mut message = None;
    let termination = loop {
        let lu = model.spectral().fractional_laplacian(&u, s)?;
        let nu = model.nonlinear_term(&u)?;
        let kinetic = lu.dot(&u).to_f64_lossy();
        let mass = u.norm_sq().to_f64_lossy();
        let nonlocal = nu.dot(&u).to_f64_lossy();
        let stabilizer = (kinetic + omega * mass) / nonlocal;
        let energy = kinetic / 2.0 + omega * mass / 2.0 - nonlocal / (2.0 * p);
        let mut grad = &lu - &nu;
        grad.axpy(T::of(omega), &u);
        let residual = grad.norm().to_f64_lossy() / mass.sqrt();
        history.push(HistoryEntry { iteration, energy, residual });
        if !(stabilizer.is_finite() && residual.is_finite()) || !(1e-12..=1e12).contains(&stabilizer) {
            message = Some(format!("stabilizing factor {stabilizer:e} at step {iteration}"));
            break Termination::Diverged;
        }
        if residual <= opts.tol && (stabilizer - 1.0).abs() <= opts.tol {
            break Termination::Converged;
        }
        if iteration >= opts.max_iter {
            break Termination::MaxIter;
        }
        let next = model
            .spectral()
            .resolvent(&nu, s, omega)?
            .scaled(T::of(stabilizer.powf(gamma)));
        u = project(&next)?;
        iteration += 1;
    };

    let field = if termination == Termination::Converged {
        normalize_pose(u, opts.symmetry)
    } else {
        u
    };
    let rho = field.norm().to_f64_lossy();
    let certificate = if field.is_finite() && rho > 0.0 {
        Some(certify(model, &field, Normalization::Frequency(omega), &CertifyOptions::default())?)
    } else {
        None
    };
    Ok(SolveReport {
        field,
        solver: SolverKind::Petviashvili,
        iterations: iteration,
        history,
        termination,
        message,
        lambda: omega,
        rho,
        dt: None,
        symmetry: opts.symmetry,
        flags,
        certificate,
    })
}
