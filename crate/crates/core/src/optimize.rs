//! One-dimensional golden-section search.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimizer of a unimodal `f` on `[a, b]`, to an interval width of `tol`.
pub fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..500 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let m = 0.5 * (a + b);
    [(c, fc), (d, fd), (m, f(m))]
        .into_iter()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(x, _)| x)
        .unwrap()
}
