//! Problem parameters `(N, s, alpha, p, omega)` and the existence regimes
//! carved out by the exponent thresholds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Validated parameters of `(-Δ)^s u + ω u = (K_α * |u|^p)|u|^{p-2} u` on ℝ^N.
///
/// `omega = 0` is accepted here and denotes the zero-mass problem; contexts
/// that need the massive problem call [`ProblemParams::require_massive`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub dim: usize,
    pub s: f64,
    pub alpha: f64,
    pub p: f64,
    pub omega: f64,
}

impl ProblemParams {
    pub fn new(dim: usize, s: f64, alpha: f64, p: f64, omega: f64) -> Result<Self> {
        if dim < 1 || dim > u8::MAX as usize {
            return Err(Error::OutOfRange("dim"));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::OutOfRange("s"));
        }
        if !(alpha > 0.0 && alpha < dim as f64) {
            return Err(Error::OutOfRange("alpha"));
        }
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::OutOfRange("p"));
        }
        if !(omega >= 0.0) || !omega.is_finite() {
            return Err(Error::OutOfRange("omega"));
        }
        Ok(Self {
            dim,
            s,
            alpha,
            p,
            omega,
        })
    }

    pub fn require_massive(&self) -> Result<()> {
        if self.omega > 0.0 {
            Ok(())
        } else {
            Err(Error::NonPositiveOmegaForPOmega)
        }
    }

    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        Self::new(self.dim, self.s, self.alpha, self.p, omega)
    }

    pub fn with_p(&self, p: f64) -> Result<Self> {
        Self::new(self.dim, self.s, self.alpha, p, self.omega)
    }

    pub fn n(&self) -> f64 {
        self.dim as f64
    }

    /// `N(p-1) - α`: the power of τ picked up by the nonlocal term under the
    /// mass-preserving dilation.
    pub fn a_exponent(&self) -> f64 {
        self.n() * (self.p - 1.0) - self.alpha
    }

    /// `N + α - (N-2s)p`, positive exactly below the upper critical exponent.
    pub fn b_exponent(&self) -> f64 {
        self.n() + self.alpha - (self.n() - 2.0 * self.s) * self.p
    }

    /// Gagliardo-Nirenberg interpolation exponent `β = (Np - N - α)/(2sp)`.
    pub fn gn_beta(&self) -> f64 {
        (self.n() * self.p - self.n() - self.alpha) / (2.0 * self.s * self.p)
    }

    pub fn thresholds(&self) -> Result<Thresholds> {
        Thresholds::new(self.dim, self.s, self.alpha)
    }
}

/// Five raw reals in the order `(dim, s, alpha, p, omega)`.
pub fn validate_params(raw: [f64; 5]) -> Result<ProblemParams> {
    let [dim, s, alpha, p, omega] = raw;
    if !(dim >= 1.0) || dim.fract() != 0.0 || dim > u8::MAX as f64 {
        return Err(Error::OutOfRange("dim"));
    }
    ProblemParams::new(dim as usize, s, alpha, p, omega)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// `1 + α/N`
    pub p_low: f64,
    /// `1 + (2s+α)/N`
    pub p_mass: f64,
    /// `(N+α)/(N-2s)`
    pub p_high: f64,
}

impl Thresholds {
    pub fn new(dim: usize, s: f64, alpha: f64) -> Result<Self> {
        let n = dim as f64;
        if n <= 2.0 * s {
            return Err(Error::DimensionTooSmall(format!("2s = {}", 2.0 * s)));
        }
        Ok(Self {
            p_low: 1.0 + alpha / n,
            p_mass: 1.0 + (2.0 * s + alpha) / n,
            p_high: (n + alpha) / (n - 2.0 * s),
        })
    }

    /// `p` replaced by the threshold it equals up to round-off, if any.
    ///
    /// Decimal inputs such as `s = 0.4` are not exact in binary, so a
    /// threshold computed from them can miss the decimal value of `p` by an
    /// ulp or two (`1.5/(1-0.8)` gives `7.500000000000002`).
    pub fn snap(&self, p: f64) -> f64 {
        for t in [self.p_low, self.p_mass, self.p_high] {
            if (p - t).abs() <= BOUNDARY_ULPS * f64::EPSILON * t.abs() {
                return t;
            }
        }
        p
    }
}

/// Distance, in units of relative machine epsilon, within which `p` counts
/// as lying on a threshold.
pub const BOUNDARY_ULPS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegimeTag {
    NonexistenceLow,
    MassSubcritical,
    MassCritical,
    MassSupercritical,
    EnergyCritical,
    NonexistenceHigh,
}

impl RegimeTag {
    /// Inside the open existence window `p_low < p < p_high`.
    pub fn in_existence_window(self) -> bool {
        matches!(
            self,
            RegimeTag::MassSubcritical | RegimeTag::MassCritical | RegimeTag::MassSupercritical
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub tag: RegimeTag,
    pub thresholds: Thresholds,
}

/// Comparisons against the computed thresholds after [`Thresholds::snap`];
/// boundaries `p_low` and `p_high` count as nonexistence, `p_mass` as mass
/// critical.
pub fn classify_regime(params: &ProblemParams) -> Result<Regime> {
    let t = params.thresholds()?;
    let p = t.snap(params.p);
    let tag = if p <= t.p_low {
        RegimeTag::NonexistenceLow
    } else if p == t.p_high && params.omega == 0.0 {
        RegimeTag::EnergyCritical
    } else if p >= t.p_high {
        RegimeTag::NonexistenceHigh
    } else if p < t.p_mass {
        RegimeTag::MassSubcritical
    } else if p == t.p_mass {
        RegimeTag::MassCritical
    } else {
        RegimeTag::MassSupercritical
    };
    Ok(Regime { tag, thresholds: t })
}
