//! Ground states by normalized gradient flow on `‖u‖ = ρ` and by
//! Petviashvili iteration at fixed frequency.

mod ngf;
mod petviashvili;
pub mod symmetry;

use serde::{Deserialize, Serialize};

use crate::analysis::Certificate;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{Field, Grid};
use crate::trial::gaussian_mixture;

pub use ngf::{solve_ground_state_ngf, solve_ground_state_ngf_from};
pub use petviashvili::{petviashvili_exponent, solve_petviashvili, solve_petviashvili_from};
pub use symmetry::{symmetrize, Projector, SymmetrySpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Pseudo-time step of the gradient flow.
    pub dt: f64,
    pub max_iter: usize,
    /// Relative gradient tolerance.
    pub tol: f64,
    pub seed: u64,
    /// Amplitude of the seeded perturbation added to the initial guess,
    /// relative to its maximum. Zero keeps the guess exactly symmetric.
    pub noise: f64,
    pub symmetry: Option<SymmetrySpec>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            dt: 0.5,
            max_iter: 5000,
            tol: 1e-9,
            seed: 0,
            noise: 0.0,
            symmetry: None,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidOption(format!("dt = {}", self.dt)));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidOption("max_iter must be at least 1".into()));
        }
        if !(self.tol >= 1e-12 && self.tol.is_finite()) {
            return Err(Error::InvalidOption(format!("tol = {} (must be ≥ 1e-12)", self.tol)));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::InvalidOption(format!("noise = {}", self.noise)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Converged,
    MaxIter,
    Diverged,
    RegimeUnsupported,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub energy: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverKind {
    Ngf,
    Petviashvili,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport<T: Real> {
    #[serde(skip)]
    pub field: Field<T>,
    pub solver: SolverKind,
    pub iterations: usize,
    pub history: Vec<HistoryEntry>,
    pub termination: Termination,
    /// Why the run stopped early, if it did.
    pub message: Option<String>,
    /// Frequency (Petviashvili) or Lagrange multiplier (gradient flow).
    pub lambda: f64,
    pub rho: f64,
    /// Final time step of the gradient flow.
    pub dt: Option<f64>,
    pub symmetry: Option<SymmetrySpec>,
    /// Caveats about the run, e.g. a symmetry class outside the range where
    /// the corresponding solutions are known to exist.
    pub flags: Vec<String>,
    pub certificate: Option<Certificate>,
}

impl<T: Real> SolveReport<T> {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    pub fn final_residual(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |h| h.residual)
    }

    /// The report itself if converged, otherwise the matching error.
    pub fn require_converged(self) -> Result<Self> {
        match self.termination {
            Termination::Converged => Ok(self),
            Termination::MaxIter => Err(Error::NoConvergence(self.iterations)),
            Termination::Diverged => Err(Error::Diverged(self.message.unwrap_or_default())),
            Termination::RegimeUnsupported => Err(Error::NotConverged("regime unsupported".into())),
        }
    }
}

/// Default initial guess for a symmetry class: `e^{-|x|²/2}`, or
/// `(|x₁|² - |x₂|²) e^{-|x|²/2}` for odd classes, plus seeded noise.
pub fn initial_guess<T: Real>(grid: Grid, opts: &SolverOptions) -> Field<T> {
    let m = match opts.symmetry {
        Some(SymmetrySpec::OddSwap(m)) => Some(m),
        _ => None,
    };
    let mut u: Field<T> = Field::from_fn(grid, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let shape = match m {
            Some(m) => {
                let a: f64 = x[..m].iter().map(|v| v * v).sum();
                let b: f64 = x[m..2 * m].iter().map(|v| v * v).sum();
                a - b
            }
            None => 1.0,
        };
        shape * (-0.5 * r2).exp()
    });
    if opts.noise > 0.0 {
        let bumps = gaussian_mixture::<T>(grid, opts.seed);
        let scale = opts.noise * u.max_abs().to_f64_lossy() / bumps.max_abs().to_f64_lossy();
        u.axpy(T::of(scale), &bumps);
    }
    u
}

fn flags_for(dim: usize, symmetry: Option<SymmetrySpec>) -> Result<Vec<String>> {
    let mut flags = Vec::new();
    if let Some(spec) = symmetry {
        if spec.validate(dim)? {
            flags.push(format!(
                "low-dimensional demonstration: {spec:?} in N = {dim}; \
                 sign-changing nonradial solutions are only known to exist for N = 4 or N ≥ 6"
            ));
        }
    }
    Ok(flags)
}

/// Recentres and fixes the sign of an unconstrained solution.
fn normalize_pose<T: Real>(u: Field<T>, symmetry: Option<SymmetrySpec>) -> Field<T> {
    if symmetry.is_some() {
        return u;
    }
    let u = u.sign_normalized();
    let g = *u.grid();
    if u.argmax() == g.origin_index() {
        u
    } else {
        u.recentered()
    }
}

#[cfg(test)]
mod tests;
