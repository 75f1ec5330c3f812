//! Seeded smooth trial fields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Real;
use crate::spectral::{Field, Grid};

/// `e^{-|x|^2/2}`
pub fn gaussian<T: Real>(grid: Grid) -> Field<T> {
    Field::radial(grid, |r| (-0.5 * r * r).exp())
}

/// Sum of 1 to 4 Gaussian bumps with random centres, widths and amplitudes.
///
/// Widths are kept between 5 grid spacings and a fifth of the box, and centres
/// within the middle third, so the field is resolved and decays at the edge.
pub fn gaussian_mixture<T: Real>(grid: Grid, seed: u64) -> Field<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = grid.half_width();
    let w_min = (5.0 * grid.spacing()).min(0.1 * l);
    let w_max = (0.2 * l).max(w_min * 1.5).min(3.0);
    let count = rng.random_range(1..=4);
    let bumps: Vec<(Vec<f64>, f64, f64)> = (0..count)
        .map(|_| {
            let centre = (0..grid.dim())
                .map(|_| rng.random_range(-l / 3.0..l / 3.0).clamp(-2.0 * w_max, 2.0 * w_max))
                .collect();
            let width = rng.random_range(w_min..w_max);
            let amp = rng.random_range(0.2..2.0) * if rng.random_bool(0.2) { -1.0 } else { 1.0 };
            (centre, width, amp)
        })
        .collect();
    Field::from_fn(grid, |x| {
        bumps
            .iter()
            .map(|(c, w, a)| {
                let d2: f64 = x.iter().zip(c).map(|(xi, ci)| (xi - ci).powi(2)).sum();
                a * (-d2 / (2.0 * w * w)).exp()
            })
            .sum()
    })
}

/// Independent standard normal samples; not smooth, used for operator identities.
pub fn white_noise<T: Real>(grid: Grid, seed: u64) -> Field<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.len())
        .map(|_| T::of(rng.random_range(-1.0..1.0)))
        .collect();
    Field::from_raw(grid, values)
}
