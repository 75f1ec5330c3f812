use thiserror::Error;

use crate::params::RegimeTag;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter `{0}` out of range")]
    OutOfRange(&'static str),
    #[error("omega must be positive for the massive problem")]
    NonPositiveOmegaForPOmega,
    #[error("dimension too small: need N > {0}")]
    DimensionTooSmall(String),
    #[error("grid of {points} elements exceeds the budget of {cap}")]
    BudgetExceeded { points: u128, cap: u128 },
    #[error("Riesz order alpha = {0} must lie in (0, N)")]
    AlphaOutOfRange(f64),
    #[error("resolvent is singular: omega = 0 and the field has a nonzero mean")]
    SingularResolvent,
    #[error("field is identically zero")]
    ZeroField,
    #[error("second variation needs p >= 2 (got p = {0})")]
    PNotC2(f64),
    #[error("incompatible symmetry spec: {0}")]
    IncompatibleSpec(String),
    #[error("regime {0:?} is not supported by this solver")]
    RegimeUnsupported(RegimeTag),
    #[error("iteration diverged: {0}")]
    Diverged(String),
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("regime mismatch: {0}")]
    RegimeMismatch(&'static str),
    #[error("certificate inputs are not from converged matched runs: {0}")]
    NotConverged(String),
    #[error("eigensolver stalled after {0} iterations")]
    EigensolverStall(usize),
    #[error("decay window too noisy: {0}")]
    WindowTooNoisy(String),
    #[error("imaginary part after inverse transform too large ({0:e} relative)")]
    ImaginaryLeak(f64),
    #[error("grids do not match")]
    GridMismatch,
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("invalid option: {0}")]
    InvalidOption(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    /// True for errors caused by bad user input rather than failed numerics or I/O.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::OutOfRange(_)
                | Error::NonPositiveOmegaForPOmega
                | Error::DimensionTooSmall(_)
                | Error::BudgetExceeded { .. }
                | Error::AlphaOutOfRange(_)
                | Error::SingularResolvent
                | Error::ZeroField
                | Error::PNotC2(_)
                | Error::IncompatibleSpec(_)
                | Error::RegimeUnsupported(_)
                | Error::RegimeMismatch(_)
                | Error::GridMismatch
                | Error::InvalidField(_)
                | Error::InvalidOption(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
