//! Projections onto fixed-point subspaces of orthogonal group actions.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{Field, Grid};

/// Symmetry class imposed on iterates.
///
/// Coordinates split as `x = (x₁, x₂, x₃)` with `x₁, x₂ ∈ ℝ^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetrySpec {
    /// Functions of `|x|` only.
    Radial,
    /// Functions of `(|x₁|, |x₂|, |x₃|)`.
    BlockRadial(usize),
    /// Block-radial and odd under `x₁ ↔ x₂`.
    OddSwap(usize),
}

impl SymmetrySpec {
    /// Checks the class against the dimension. Returns `true` when the class
    /// is accepted only as a demonstration (`OddSwap(1)`, e.g. in `N = 2`),
    /// outside the range where nonradial solutions are known to exist.
    pub fn validate(self, dim: usize) -> Result<bool> {
        let bad = |why: &str| Err(Error::IncompatibleSpec(format!("{self:?} in N = {dim}: {why}")));
        match self {
            SymmetrySpec::Radial => Ok(false),
            SymmetrySpec::BlockRadial(m) if m == 0 || 2 * m > dim => bad("need 1 ≤ m ≤ N/2"),
            SymmetrySpec::BlockRadial(_) => Ok(false),
            SymmetrySpec::OddSwap(m) if m == 0 || 2 * m > dim => bad("need 1 ≤ m ≤ N/2"),
            SymmetrySpec::OddSwap(m) if dim % 2 == 1 && m == (dim - 1) / 2 => bad("m = (N-1)/2"),
            SymmetrySpec::OddSwap(1) => Ok(true),
            SymmetrySpec::OddSwap(_) => Ok(false),
        }
    }

    pub fn is_odd(self) -> bool {
        matches!(self, SymmetrySpec::OddSwap(_))
    }
}

/// Shell-averaging operator for one spec on one grid.
///
/// Grid points are grouped by the exact integer squared norms of their
/// offsets from the origin point, per block. Every grid reflection and axis
/// permutation within a block preserves the classes, so averaging over a
/// class also averages over that group.
#[derive(Debug, Clone)]
pub struct Projector {
    grid: Grid,
    class_of: Vec<u32>,
    counts: Vec<u32>,
    /// Class of the block-swapped key, for odd projections.
    partner: Option<Vec<u32>>,
}

impl Projector {
    pub fn new(grid: Grid, spec: SymmetrySpec) -> Result<Self> {
        spec.validate(grid.dim())?;
        let dim = grid.dim();
        let m = match spec {
            SymmetrySpec::Radial => dim,
            SymmetrySpec::BlockRadial(m) | SymmetrySpec::OddSwap(m) => m,
        };
        let half = (grid.points_per_dim() / 2) as i64;
        let block = |a: usize| {
            if spec == SymmetrySpec::Radial || a < m {
                0
            } else if a < 2 * m {
                1
            } else {
                2
            }
        };
        let mut ids: HashMap<[u64; 3], u32> = HashMap::new();
        let mut keys: Vec<[u64; 3]> = Vec::new();
        let mut class_of = Vec::with_capacity(grid.len());
        let mut idx = vec![0; dim];
        for flat in 0..grid.len() {
            grid.unravel(flat, &mut idx);
            let mut key = [0u64; 3];
            for (a, &i) in idx.iter().enumerate() {
                let o = i as i64 - half;
                key[block(a)] += (o * o) as u64;
            }
            let next = keys.len() as u32;
            let id = *ids.entry(key).or_insert_with(|| {
                keys.push(key);
                next
            });
            class_of.push(id);
        }
        let mut counts = vec![0u32; keys.len()];
        for &c in &class_of {
            counts[c as usize] += 1;
        }
        let partner = spec.is_odd().then(|| {
            keys.iter()
                .map(|k| ids[&[k[1], k[0], k[2]]])
                .collect()
        });
        Ok(Self { grid, class_of, counts, partner })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn apply<T: Real>(&self, u: &Field<T>) -> Result<Field<T>> {
        if *u.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let mut sums = vec![0.0f64; self.counts.len()];
        for (&c, v) in self.class_of.iter().zip(u.values()) {
            sums[c as usize] += v.to_f64_lossy();
        }
        let mean: Vec<f64> = sums
            .iter()
            .zip(&self.counts)
            .map(|(s, &n)| s / n as f64)
            .collect();
        let class_value: Vec<f64> = match &self.partner {
            None => mean,
            Some(partner) => mean
                .iter()
                .zip(partner)
                .map(|(a, &q)| 0.5 * (a - mean[q as usize]))
                .collect(),
        };
        let values = self
            .class_of
            .iter()
            .map(|&c| T::of(class_value[c as usize]))
            .collect();
        Ok(Field::from_raw(self.grid, values))
    }

    /// `‖u - Πu‖ / ‖u‖`
    pub fn deviation<T: Real>(&self, u: &Field<T>) -> Result<f64> {
        let norm = u.norm().to_f64_lossy();
        if norm == 0.0 {
            return Err(Error::ZeroField);
        }
        Ok((u - &self.apply(u)?).norm().to_f64_lossy() / norm)
    }
}

/// Projects `u` onto the fixed-point set of `spec`.
pub fn symmetrize<T: Real>(u: &Field<T>, spec: SymmetrySpec) -> Result<Field<T>> {
    Projector::new(*u.grid(), spec)?.apply(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trial::{gaussian_mixture, white_noise};

    #[test]
    fn radial_field_is_fixed() {
        let g = Grid::new(3, 16, 4.0).unwrap();
        let u = Field::<f64>::radial(g, |r| (-r * r / 3.0).exp() * (1.0 + r).cos());
        let v = symmetrize(&u, SymmetrySpec::Radial).unwrap();
        assert!((&u - &v).norm() < 1e-13 * u.norm());
        let w = symmetrize(&u, SymmetrySpec::BlockRadial(1)).unwrap();
        assert!((&u - &w).norm() < 1e-13 * u.norm());
    }

    #[test]
    fn odd_projection_kills_even_fields() {
        let g = Grid::new(2, 32, 6.0).unwrap();
        let f = |a: f64, b: f64| (-(a - 1.0).powi(2) - b * b).exp();
        let u = Field::<f64>::from_fn(g, |x| f(x[0], x[1]));
        let even = Field::<f64>::from_fn(g, |x| f(x[0], x[1]) + f(x[1], x[0]));
        let v = symmetrize(&even, SymmetrySpec::OddSwap(1)).unwrap();
        assert!(v.max_abs() < 1e-14);
        let odd = symmetrize(&u, SymmetrySpec::OddSwap(1)).unwrap();
        assert!(odd.max() > 0.1 && odd.min() < -0.1);
    }

    #[test]
    fn projections_are_idempotent() {
        for (dim, n, spec) in [
            (1, 64, SymmetrySpec::Radial),
            (2, 24, SymmetrySpec::Radial),
            (2, 24, SymmetrySpec::OddSwap(1)),
            (3, 12, SymmetrySpec::BlockRadial(1)),
            (4, 8, SymmetrySpec::OddSwap(2)),
        ] {
            let g = Grid::new(dim, n, 5.0).unwrap();
            let p = Projector::new(g, spec).unwrap();
            for seed in 0..50 {
                let u = if seed % 2 == 0 {
                    white_noise::<f64>(g, seed)
                } else {
                    gaussian_mixture::<f64>(g, seed)
                };
                let once = p.apply(&u).unwrap();
                let twice = p.apply(&once).unwrap();
                assert!((&twice - &once).norm() < 1e-13 * u.norm(), "{spec:?}");
            }
        }
    }

    #[test]
    fn incompatible_specs() {
        assert!(SymmetrySpec::BlockRadial(2).validate(3).is_err());
        assert!(SymmetrySpec::OddSwap(0).validate(3).is_err());
        assert!(SymmetrySpec::OddSwap(2).validate(5).is_err());
        assert!(!SymmetrySpec::OddSwap(2).validate(4).unwrap());
        assert!(SymmetrySpec::OddSwap(1).validate(3).is_err());
        assert!(SymmetrySpec::OddSwap(1).validate(2).unwrap());
        let g = Grid::new(1, 16, 2.0).unwrap();
        let u = Field::<f64>::zeros(g);
        assert!(matches!(symmetrize(&u, SymmetrySpec::OddSwap(1)), Err(Error::IncompatibleSpec(_))));
    }
}
