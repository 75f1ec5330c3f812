//! Spectral laboratory for the fractional Choquard equation
//!
//! ```text
//! (-Δ)^s u + ω u = (K_α * |u|^p) |u|^{p-2} u,   K_α(x) = |x|^{α-N}
//! ```
//!
//! on a periodic box, with ground-state solvers and certificates checking
//! Nehari and Pohozaev identities, scaling laws, Morse index, decay and the
//! explicit zero-mass bubbles.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod analysis;
pub mod error;
pub mod functionals;
pub mod io;
mod optimize;
pub mod params;
pub mod scalar;
pub mod solvers;
pub mod spectral;
pub mod trial;

pub use analysis::{certify, Certificate, CertifyOptions, Normalization};
pub use error::{Error, Result};
pub use functionals::{hessian_apply, Choquard, FunctionalValues, Hessian, LagrangeMultiplier};
pub use params::{classify_regime, validate_params, ProblemParams, Regime, RegimeTag, Thresholds};
pub use scalar::Real;
pub use solvers::{SolveReport, SolverOptions, SymmetrySpec, Termination};
pub use spectral::{ConvolutionMode, Field, Grid, Spectral};

pub type Field64 = Field<f64>;
pub type Field32 = Field<f32>;
pub type Spectral64 = Spectral<f64>;
pub type Spectral32 = Spectral<f32>;
