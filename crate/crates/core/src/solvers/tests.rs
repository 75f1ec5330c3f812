use super::*;
use crate::functionals::Choquard;
use crate::params::{ProblemParams, RegimeTag};
use crate::spectral::Spectral;

fn params(dim: usize, s: f64, alpha: f64, p: f64, omega: f64) -> ProblemParams {
    ProblemParams::new(dim, s, alpha, p, omega).unwrap()
}

#[test]
fn ngf_one_dimensional_ground_state() {
    let g = Grid::new(1, 512, 30.0).unwrap();
    let sp = Spectral::<f64>::new(g);
    let model = Choquard::new(&sp, params(1, 0.4, 0.5, 2.0, 1.0));
    let report = solve_ground_state_ngf(&model, 1.0, &SolverOptions::default()).unwrap();
    assert!(report.converged(), "{:?} {:?}", report.termination, report.history.last());
    assert!(report.lambda > 0.0);
    let cert = report.certificate.as_ref().unwrap();
    assert!(cert.functionals.e_zero < 0.0);
    // mass exact and energy nonincreasing after the startup steps
    assert!((report.field.norm() - 1.0).abs() < 1e-13);
    for w in report.history[10..].windows(2) {
        assert!(w[1].energy <= w[0].energy + 1e-13 * w[0].energy.abs());
    }
    assert!(report.field.min() >= -1e-10 * report.field.max());
}

#[test]
fn ngf_rejects_mass_critical_and_beyond() {
    let g = Grid::new(1, 64, 10.0).unwrap();
    let sp = Spectral::<f64>::new(g);
    let (s, alpha) = (0.4, 0.5);
    let p_mass = 1.0 + (2.0 * s + alpha) / 1.0;
    for p in [p_mass, 3.0] {
        let model = Choquard::new(&sp, params(1, s, alpha, p, 1.0));
        let err = solve_ground_state_ngf(&model, 1.0, &SolverOptions::default()).unwrap_err();
        assert!(matches!(err, Error::RegimeUnsupported(_)), "{err}");
    }
}

#[test]
fn petviashvili_rejects_outside_window() {
    let g = Grid::new(1, 64, 10.0).unwrap();
    let sp = Spectral::<f64>::new(g);
    // p_high = (N+α)/(N-2s) = 7.5
    for p in [8.0, 7.5, 1.5] {
        let model = Choquard::new(&sp, params(1, 0.4, 0.5, p, 1.0));
        let err = solve_petviashvili(&model, &SolverOptions::default()).unwrap_err();
        assert!(matches!(err, Error::RegimeUnsupported(_)), "p = {p}: {err}");
    }
    let model = Choquard::new(&sp, params(1, 0.4, 0.5, 2.0, 0.0));
    assert!(solve_petviashvili(&model, &SolverOptions::default()).is_err());
}

#[test]
fn petviashvili_fixed_point_and_stabilizer() {
    let g = Grid::new(1, 512, 30.0).unwrap();
    let sp = Spectral::<f64>::new(g);
    let model = Choquard::new(&sp, params(1, 0.4, 0.5, 2.5, 1.0));
    let opts = SolverOptions::default();
    let report = solve_petviashvili(&model, &opts).unwrap();
    assert!(report.converged(), "{:?}", report.history.last());
    let again = solve_petviashvili_from(&model, report.field.clone(), &opts).unwrap();
    assert!(again.converged() && again.iterations <= 5);
    let cert = report.certificate.unwrap();
    assert!(cert.functionals.nehari_res.abs() < 1e-8);
    assert!(report.field.min() >= -1e-10 * report.field.max());
}

#[test]
fn petviashvili_keeps_symmetry() {
    let g = Grid::new(2, 32, 10.0).unwrap();
    let sp = Spectral::<f64>::new(g);
    let model = Choquard::new(&sp, params(2, 0.6, 1.0, 2.0, 1.0));
    let opts = SolverOptions { symmetry: Some(SymmetrySpec::OddSwap(1)), max_iter: 2000, ..Default::default() };
    let report = solve_petviashvili(&model, &opts).unwrap();
    assert!(report.converged(), "{:?}", report.history.last());
    assert!(!report.flags.is_empty());
    let p = Projector::new(g, SymmetrySpec::OddSwap(1)).unwrap();
    assert!(p.deviation(&report.field).unwrap() < 1e-10);
    assert!(report.field.max() > 0.0 && report.field.min() < 0.0);
}

#[test]
fn options_validation() {
    let bad = SolverOptions { tol: 1e-13, ..Default::default() };
    assert!(bad.validate().is_err());
    let bad = SolverOptions { max_iter: 0, ..Default::default() };
    assert!(bad.validate().is_err());
    assert_eq!(petviashvili_exponent(2.0), 1.5);
    let _ = RegimeTag::MassSubcritical;
}
