//! Lowest eigenvalues of the second variation by preconditioned block
//! iteration (LOBPCG).

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{Choquard, Hessian};
use crate::scalar::Real;
use crate::spectral::{Field, Spectral};
use crate::trial::white_noise;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MorseOptions {
    /// Number of eigenvalues reported.
    pub k: usize,
    /// Extra block vectors that speed up convergence of the last wanted ones.
    pub guard: usize,
    /// Residual `‖Hx - θx‖` relative to the largest `|θ|` among the `k`.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Eigenvalues with `|θ| < zero_tol_factor · max |θ|` count as zero.
    pub zero_tol_factor: f64,
}

impl Default for MorseOptions {
    fn default() -> Self {
        Self { k: 8, guard: 4, tol: 1e-7, max_iter: 400, seed: 7, zero_tol_factor: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseData {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub negative_count: usize,
    pub zero_modes: usize,
    /// Smallest cosine of the principal angles between `span{∂_i u}` and the
    /// numerically found near-kernel; 0 if the kernel is missing.
    pub translation_overlap: f64,
    pub zero_tol: f64,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    /// `s ≤ 1/2` lies outside the range where the index is known to be one.
    pub flags: Vec<String>,
}

/// Eigenpairs of a symmetric operator on grid fields.
pub struct Eigenpairs<T: Real> {
    pub values: Vec<f64>,
    pub vectors: Vec<Field<T>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

/// Columns kept together with their images under the operator.
struct Block<T: Real> {
    x: Vec<Field<T>>,
    ax: Vec<Field<T>>,
}

fn combine<T: Real>(basis: &[Field<T>], coeffs: &DMatrix<f64>, col: usize, rows: std::ops::Range<usize>) -> Field<T> {
    let mut out = Field::zeros(*basis[0].grid());
    for r in rows {
        let c = coeffs[(r, col)];
        if c != 0.0 {
            out.axpy(T::of(c), &basis[r]);
        }
    }
    out
}

/// Appends `v` to the orthonormal basis unless it is numerically dependent.
/// The image `av` follows the same linear combination.
fn push_orthonormal<T: Real>(block: &mut Block<T>, mut v: Field<T>, mut av: Field<T>) -> bool {
    let start = v.norm().to_f64_lossy();
    if !(start > 0.0) {
        return false;
    }
    for _ in 0..2 {
        for (q, aq) in block.x.iter().zip(&block.ax) {
            let c = q.dot(&v);
            v.axpy(-c, q);
            av.axpy(-c, aq);
        }
    }
    let norm = v.norm().to_f64_lossy();
    if norm < 1e-10 * start {
        return false;
    }
    let inv = T::of(1.0 / norm);
    v.scale(inv);
    av.scale(inv);
    block.x.push(v);
    block.ax.push(av);
    true
}

/// The `k` lowest eigenpairs of `op`, preconditioned by `precond`.
pub fn lowest_eigenpairs<T: Real>(
    op: impl Fn(&Field<T>) -> Result<Field<T>>,
    precond: impl Fn(&Field<T>) -> Result<Field<T>>,
    grid: crate::spectral::Grid,
    opts: &MorseOptions,
) -> Result<Eigenpairs<T>> {
    let k = opts.k;
    let m = (k + opts.guard).min(grid.len());
    if k == 0 || k > m {
        return Err(Error::InvalidOption(format!("k = {k}")));
    }

    let mut basis = Block { x: Vec::new(), ax: Vec::new() };
    for j in 0..m as u64 {
        let v = precond(&white_noise::<T>(grid, opts.seed.wrapping_mul(1000).wrapping_add(j)))?;
        let av = op(&v)?;
        push_orthonormal(&mut basis, v, av);
    }
    if basis.x.len() < k {
        return Err(Error::InvalidOption(format!("k = {k} exceeds the usable basis")));
    }
    let mut x = rayleigh_ritz(&basis, basis.x.len().min(m));
    let mut p: Option<Block<T>> = None;
    let mut residuals = vec![f64::INFINITY; k];

    for iteration in 0..opts.max_iter {
        if iteration > 0 && iteration % 20 == 0 {
            // image drift from repeated linear combinations
            x.block.ax = x.block.x.iter().map(&op).collect::<Result<_>>()?;
        }
        let scale = x.values[..k].iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
        let mut r: Vec<Field<T>> = Vec::with_capacity(x.values.len());
        for (j, theta) in x.values.iter().enumerate() {
            let mut rj = x.block.ax[j].clone();
            rj.axpy(T::of(-theta), &x.block.x[j]);
            r.push(rj);
        }
        for j in 0..k {
            residuals[j] = r[j].norm().to_f64_lossy() / scale;
        }
        if residuals.iter().all(|&res| res < opts.tol) {
            return Ok(Eigenpairs {
                values: x.values[..k].to_vec(),
                vectors: x.block.x[..k].to_vec(),
                residuals,
                iterations: iteration,
            });
        }

        let mut s = Block { x: Vec::new(), ax: Vec::new() };
        for (v, av) in x.block.x.iter().zip(&x.block.ax) {
            push_orthonormal(&mut s, v.clone(), av.clone());
        }
        let n_x = s.x.len();
        for rj in &r {
            let w = precond(rj)?;
            let aw = op(&w)?;
            push_orthonormal(&mut s, w, aw);
        }
        if let Some(pb) = p.take() {
            for (v, av) in pb.x.into_iter().zip(pb.ax) {
                push_orthonormal(&mut s, v, av);
            }
        }
        let dim = s.x.len();
        let (values, coeffs) = ritz(&s);
        let keep = m.min(dim);
        let mut next = Block { x: Vec::with_capacity(keep), ax: Vec::with_capacity(keep) };
        let mut dir = Block { x: Vec::with_capacity(keep), ax: Vec::with_capacity(keep) };
        for j in 0..keep {
            next.x.push(combine(&s.x, &coeffs, j, 0..dim));
            next.ax.push(combine(&s.ax, &coeffs, j, 0..dim));
            dir.x.push(combine(&s.x, &coeffs, j, n_x..dim));
            dir.ax.push(combine(&s.ax, &coeffs, j, n_x..dim));
        }
        x = Ritz { values: values[..keep].to_vec(), block: next };
        p = Some(dir);
    }
    Err(Error::EigensolverStall(opts.max_iter))
}

struct Ritz<T: Real> {
    values: Vec<f64>,
    block: Block<T>,
}

/// Ascending Ritz values and coefficient columns on an orthonormal basis.
fn ritz<T: Real>(s: &Block<T>) -> (Vec<f64>, DMatrix<f64>) {
    let d = s.x.len();
    let mut g = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = 0.5 * (s.x[i].dot(&s.ax[j]) + s.x[j].dot(&s.ax[i])).to_f64_lossy();
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(g);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let coeffs = DMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, coeffs)
}

fn rayleigh_ritz<T: Real>(s: &Block<T>, keep: usize) -> Ritz<T> {
    let (values, coeffs) = ritz(s);
    let d = s.x.len();
    let block = Block {
        x: (0..keep).map(|j| combine(&s.x, &coeffs, j, 0..d)).collect(),
        ax: (0..keep).map(|j| combine(&s.ax, &coeffs, j, 0..d)).collect(),
    };
    Ritz { values: values[..keep].to_vec(), block }
}

/// Orthonormal basis of the span of `fields` (dependent ones dropped).
fn orthonormal_span<T: Real>(fields: &[Field<T>]) -> Vec<Field<T>> {
    let mut b = Block { x: Vec::new(), ax: Vec::new() };
    for f in fields {
        push_orthonormal(&mut b, f.clone(), f.clone());
    }
    b.x
}

/// Smallest singular value of `Qaᵀ Qb` over the columns of `a`: the cosine
/// of the largest principal angle between `span a` and its projection on `span b`.
fn min_principal_cosine<T: Real>(a: &[Field<T>], b: &[Field<T>]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    if b.len() < a.len() {
        return 0.0;
    }
    let c = DMatrix::from_fn(a.len(), b.len(), |i, j| a[i].dot(&b[j]).to_f64_lossy());
    c.singular_values().iter().copied().fold(f64::INFINITY, f64::min).clamp(0.0, 1.0)
}

fn preconditioner<'s, T: Real>(
    spectral: &'s Spectral<T>,
    s: f64,
    lambda: f64,
) -> impl Fn(&Field<T>) -> Result<Field<T>> + 's {
    let shift = if lambda > 0.0 { lambda } else { 1.0 };
    move |r: &Field<T>| spectral.resolvent(r, s, shift)
}

/// Spectrum summary of an assembled second variation around `u`.
pub fn hessian_spectrum<T: Real>(
    hessian: &Hessian<'_, T>,
    spectral: &Spectral<T>,
    s: f64,
    u: &Field<T>,
    opts: &MorseOptions,
) -> Result<MorseData> {
    let pairs = lowest_eigenpairs(
        |x| hessian.apply(x),
        preconditioner(spectral, s, hessian.lambda()),
        *spectral.grid(),
        opts,
    )?;
    let biggest = pairs.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let zero_tol = opts.zero_tol_factor * biggest;
    let negative_count = pairs.values.iter().filter(|&&v| v < -zero_tol).count();
    let zero: Vec<Field<T>> = pairs
        .values
        .iter()
        .zip(&pairs.vectors)
        .filter(|(v, _)| v.abs() < zero_tol)
        .map(|(_, x)| x.clone())
        .collect();
    let translation_overlap = if u.is_zero() {
        0.0
    } else {
        let grads = (0..spectral.grid().dim())
            .map(|axis| spectral.derivative(u, axis))
            .collect::<Result<Vec<_>>>()?;
        min_principal_cosine(&orthonormal_span(&grads), &orthonormal_span(&zero))
    };
    let mut flags = Vec::new();
    if s <= 0.5 {
        flags.push(format!("s = {s} ≤ 1/2: Morse index one is only established for s > 1/2"));
    }
    Ok(MorseData {
        eigenvalues: pairs.values,
        negative_count,
        zero_modes: zero.len(),
        translation_overlap,
        zero_tol,
        residuals: pairs.residuals,
        iterations: pairs.iterations,
        flags,
    })
}

/// Lowest `opts.k` eigenvalues of the second variation at `u` with
/// multiplier `lambda`.
pub fn morse_spectrum<T: Real>(
    model: &Choquard<'_, T>,
    u: &Field<T>,
    lambda: f64,
    opts: &MorseOptions,
) -> Result<MorseData> {
    let hessian = model.hessian(u, lambda)?;
    hessian_spectrum(&hessian, model.spectral(), model.params().s, u, opts)
}
