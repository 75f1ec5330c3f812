//! Power-law decay fits on shell averages.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{Field, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub r: f64,
    pub u_mean: f64,
    pub u_min: f64,
    pub u_max: f64,
}

/// Values grouped by exact squared lattice distance from the origin point,
/// in increasing radius.
pub fn shell_profile<T: Real>(u: &Field<T>) -> Vec<Shell> {
    let g = u.grid();
    let half = (g.points_per_dim() / 2) as i64;
    let mut idx = vec![0; g.dim()];
    let mut shells: BTreeMap<u64, (f64, f64, f64, usize)> = BTreeMap::new();
    for (flat, v) in u.values().iter().enumerate() {
        g.unravel(flat, &mut idx);
        let m: u64 = idx.iter().map(|&i| (i as i64 - half).pow(2) as u64).sum();
        let v = v.to_f64_lossy();
        let e = shells.entry(m).or_insert((0.0, f64::INFINITY, f64::NEG_INFINITY, 0));
        e.0 += v;
        e.1 = e.1.min(v);
        e.2 = e.2.max(v);
        e.3 += 1;
    }
    let h = g.spacing();
    shells
        .into_iter()
        .map(|(m, (sum, lo, hi, count))| Shell {
            r: h * (m as f64).sqrt(),
            u_mean: sum / count as f64,
            u_min: lo,
            u_max: hi,
        })
        .collect()
}

/// CSV with columns `r,u_mean,u_min,u_max`.
pub fn shell_csv(shells: &[Shell]) -> String {
    let mut out = String::from("r,u_mean,u_min,u_max\n");
    for s in shells {
        let _ = writeln!(out, "{:e},{:e},{:e},{:e}", s.r, s.u_mean, s.u_min, s.u_max);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Slope of `log u` against `log r`.
    pub exponent: f64,
    pub amplitude: f64,
    pub window: (f64, f64),
    /// Coefficient of determination of the log-log fit.
    pub r2: f64,
    pub shells_used: usize,
}

/// `[0.15 L, 0.45 L]`
pub fn default_window(grid: &Grid) -> (f64, f64) {
    let l = grid.half_width();
    (0.15 * l, 0.45 * l)
}

/// Least-squares power law `u ≈ A r^e` over the shells with radius in
/// `window`. `u` should be centred at the origin and positive there.
pub fn fit_decay_exponent<T: Real>(u: &Field<T>, window: (f64, f64)) -> Result<DecayFit> {
    let (r_min, r_max) = window;
    let l = u.grid().half_width();
    if !(r_min > 0.0 && r_min < r_max && r_max <= 0.8 * l) {
        return Err(Error::OutOfRange("decay window"));
    }
    let peak = u.max_abs().to_f64_lossy();
    if peak == 0.0 {
        return Err(Error::ZeroField);
    }
    let floor = 1e3 * T::epsilon().to_f64_lossy() * peak;
    let shells: Vec<Shell> = shell_profile(u)
        .into_iter()
        .filter(|s| s.r >= r_min && s.r <= r_max)
        .collect();
    if shells.len() < 3 {
        return Err(Error::WindowTooNoisy(format!("only {} shells in the window", shells.len())));
    }
    if let Some(bad) = shells.iter().find(|s| s.u_mean <= floor) {
        return Err(Error::WindowTooNoisy(format!(
            "shell average {:e} at r = {} is below {floor:e}",
            bad.u_mean, bad.r
        )));
    }
    let pts: Vec<(f64, f64)> = shells.iter().map(|s| (s.r.ln(), s.u_mean.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(DecayFit {
        exponent: slope,
        amplitude: intercept.exp(),
        window,
        r2,
        shells_used: pts.len(),
    })
}
