use std::f64::consts::PI;

use super::*;
use crate::trial::{gaussian_mixture, white_noise};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn max_rel_diff(a: &Field<f64>, b: &Field<f64>) -> f64 {
    (a - b).norm() / b.norm().max(a.norm())
}

/// Composite Simpson rule, test-only quadrature oracle.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

#[test]
fn cosine_is_an_eigenfunction() {
    let g = Grid::new(2, 32, 5.0).unwrap();
    let sp = Spectral::<f64>::new(g);
    let k = [3.0 * PI / 5.0, 2.0 * PI / 5.0];
    let u = Field::from_fn(g, |x| (k[0] * x[0] + k[1] * x[1]).cos());
    let knorm = (k[0] * k[0] + k[1] * k[1]).sqrt();
    for s2 in [0.0, 0.3, 0.5, 1.0, 1.7] {
        let lu = sp.fractional_laplacian(&u, s2).unwrap();
        assert!(max_rel_diff(&lu, &u.scaled(knorm.powf(2.0 * s2))) < 1e-12);
    }
    let c = riesz_constant(2, 0.7);
    let ku = sp.riesz_convolve(&u, 0.7, ConvolutionMode::PeriodicMultiplier).unwrap();
    assert!(max_rel_diff(&ku, &u.scaled(c * knorm.powf(-0.7))) < 1e-12);
    let ru = sp.resolvent(&u, 0.6, 1.5).unwrap();
    assert!(max_rel_diff(&ru, &u.scaled(1.0 / (knorm.powf(1.2) + 1.5))) < 1e-12);
}

#[test]
fn constant_field_maps_to_zero() {
    let g = Grid::new(1, 16, 3.0).unwrap();
    let sp = Spectral::<f64>::new(g);
    let u = Field::from_fn(g, |_| 2.5);
    assert!(sp.fractional_laplacian(&u, 0.4).unwrap().max_abs() < 1e-14);
}

#[test]
fn gaussian_kinetic_energy_is_one() {
    // ∫|ξ| e^{-ξ²} dξ = 1; the box must be huge because the periodic sum sees
    // the kink of |ξ| at the origin with an error ~ (π/L)²/6.
    let oracle = 2.0 * simpson(|x| x * (-x * x).exp(), 0.0, 12.0, 20_000);
    assert!(rel(oracle, 1.0) < 1e-12);
    let g = Grid::new(1, 1 << 17, 32768.0).unwrap();
    let sp = Spectral::<f64>::new(g);
    let u = Field::radial(g, |r| (-0.5 * r * r).exp());
    let k = u.dot(&sp.fractional_laplacian(&u, 0.5).unwrap());
    assert!(rel(k, oracle) < 1e-8, "K = {k}");
    let half = sp.fractional_laplacian(&u, 0.25).unwrap();
    assert!(rel(half.norm_sq(), oracle) < 1e-8);
}

#[test]
fn newtonian_constant() {
    assert!(rel(riesz_constant(3, 2.0), 4.0 * PI) < 1e-14);
}

#[test]
fn newtonian_potential_of_gaussian() {
    let g = Grid::new(3, 48, 6.0).unwrap();
    let sp = Spectral::<f64>::new(g);
    let rho = Field::radial(g, |r| (-r * r).exp());
    let phi = sp.riesz_convolve(&rho, 2.0, ConvolutionMode::FreeSpacePadded).unwrap();
    let exact = |r: f64| {
        if r == 0.0 {
            2.0 * PI
        } else {
            PI.powf(1.5) * statrs::function::erf::erf(r) / r
        }
    };
    let r2 = g.radius_squares();
    let mut worst = 0.0f64;
    for (i, &q) in r2.iter().enumerate() {
        let r = q.sqrt();
        if r <= 3.0 {
            worst = worst.max(rel(phi.values()[i], exact(r)));
        }
    }
    assert!(worst < 1e-6, "worst relative error {worst:e}");
}

#[test]
fn free_space_matches_one_dimensional_closed_form() {
    // ∫|x-y|^{α-1} e^{-y²} dy at x = 0 equals Γ(α/2).
    let g = Grid::new(1, 512, 16.0).unwrap();
    let sp = Spectral::<f64>::new(g);
    let f = Field::radial(g, |r| (-r * r).exp());
    for alpha in [0.2, 0.5, 0.9] {
        let k = sp.riesz_convolve(&f, alpha, ConvolutionMode::FreeSpacePadded).unwrap();
        let at0 = k.values()[g.origin_index()];
        assert!(rel(at0, statrs::function::gamma::gamma(alpha / 2.0)) < 1e-9, "alpha {alpha}: {at0}");
    }
}

#[test]
fn resolvent_roundtrip_and_singularity() {
    let g = Grid::new(2, 16, 4.0).unwrap();
    let sp = Spectral::<f64>::new(g);
    for seed in 0..5 {
        let f = white_noise::<f64>(g, seed);
        let r = sp.resolvent(&f, 0.7, 0.3).unwrap();
        let back = &sp.fractional_laplacian(&r, 0.7).unwrap() + &r.scaled(0.3);
        assert!(max_rel_diff(&back, &f) < 1e-10);
    }
    let one = Field::from_fn(g, |_| 1.0);
    assert!(matches!(sp.resolvent(&one, 0.5, 0.0), Err(Error::SingularResolvent)));
    let zero_mean = Field::from_fn(g, |x| (PI * x[0] / 4.0).sin());
    assert!(sp.resolvent(&zero_mean, 0.5, 0.0).is_ok());
}

#[test]
fn alpha_out_of_range() {
    let g = Grid::new(1, 16, 4.0).unwrap();
    let sp = Spectral::<f64>::new(g);
    let f = white_noise::<f64>(g, 1);
    assert!(matches!(
        sp.riesz_convolve(&f, 1.0, ConvolutionMode::FreeSpacePadded),
        Err(Error::AlphaOutOfRange(_))
    ));
    assert!(matches!(
        sp.riesz_convolve(&f, 0.0, ConvolutionMode::PeriodicMultiplier),
        Err(Error::AlphaOutOfRange(_))
    ));
}

#[test]
fn parseval_and_roundtrip() {
    let g = Grid::new(2, 32, 3.0).unwrap();
    let sp = Spectral::<f64>::new(g);
    for seed in 0..4 {
        let u = white_noise::<f64>(g, seed);
        let spec = sp.forward(&u).unwrap();
        let energy: f64 = spec.iter().map(|c| c.norm_sqr()).sum::<f64>() * g.cell_volume()
            / g.len() as f64;
        assert!(rel(energy, u.norm_sq()) < 1e-12);
        let back = sp.inverse(spec).unwrap();
        assert!(max_rel_diff(&back, &u) < 1e-12);
    }
}

#[test]
fn linearity_self_adjointness_positivity() {
    let g = Grid::new(2, 24, 4.0).unwrap();
    let sp = Spectral::<f64>::new(g);
    for seed in 0..5 {
        let u = gaussian_mixture::<f64>(g, seed);
        let v = white_noise::<f64>(g, 100 + seed);
        let (a, b) = (0.7, -1.3);
        let comb = &u.scaled(a) + &v.scaled(b);
        for mode in [ConvolutionMode::PeriodicMultiplier, ConvolutionMode::FreeSpacePadded] {
            let ku = sp.riesz_convolve(&u, 1.1, mode).unwrap();
            let kv = sp.riesz_convolve(&v, 1.1, mode).unwrap();
            let kc = sp.riesz_convolve(&comb, 1.1, mode).unwrap();
            assert!(max_rel_diff(&kc, &(&ku.scaled(a) + &kv.scaled(b))) < 1e-12);
            let (l, r) = (ku.dot(&v), u.dot(&kv));
            assert!((l - r).abs() <= 1e-11 * l.abs().max(r.abs()));
            assert!(kv.dot(&v) >= 0.0);
            assert!(ku.dot(&u) >= 0.0);
        }
        let lu = sp.fractional_laplacian(&u, 0.35).unwrap();
        let lv = sp.fractional_laplacian(&v, 0.35).unwrap();
        let lc = sp.fractional_laplacian(&comb, 0.35).unwrap();
        assert!(max_rel_diff(&lc, &(&lu.scaled(a) + &lv.scaled(b))) < 1e-12);
        let (l, r) = (lu.dot(&v), u.dot(&lv));
        assert!((l - r).abs() <= 1e-11 * l.abs().max(r.abs()));
        let composed = sp.fractional_laplacian(&sp.fractional_laplacian(&v, 0.2).unwrap(), 0.45).unwrap();
        let direct = sp.fractional_laplacian(&v, 0.65).unwrap();
        assert!(max_rel_diff(&composed, &direct) < 1e-11);
    }
}

#[test]
fn periodic_approaches_free_space_as_box_grows() {
    let alpha = 1.2;
    let gaps: Vec<f64> = [4.0, 8.0, 16.0]
        .iter()
        .map(|&l| {
            let g = Grid::new(2, (8.0 * l) as usize, l).unwrap();
            let sp = Spectral::<f64>::new(g);
            let f = Field::radial(g, |r| (-r * r).exp());
            let per = sp.riesz_convolve(&f, alpha, ConvolutionMode::PeriodicMultiplier).unwrap();
            let free = sp.riesz_convolve(&f, alpha, ConvolutionMode::FreeSpacePadded).unwrap();
            (&per - &free).dot(&f).abs() / free.dot(&f)
        })
        .collect();
    assert!(gaps[1] < gaps[0] && gaps[2] < gaps[1], "{gaps:?}");
}

#[test]
fn single_precision_path() {
    let g = Grid::new(1, 64, 6.0).unwrap();
    let sp = Spectral::<f32>::new(g);
    let u: Field<f32> = Field::radial(g, |r| (-0.5 * r * r).exp());
    let k = sp.riesz_convolve(&u, 0.5, ConvolutionMode::FreeSpacePadded).unwrap();
    let sp64 = Spectral::<f64>::new(g);
    let k64 = sp64
        .riesz_convolve(&u.convert::<f64>(), 0.5, ConvolutionMode::FreeSpacePadded)
        .unwrap();
    assert!(max_rel_diff(&k.convert(), &k64) < 1e-5);
}
