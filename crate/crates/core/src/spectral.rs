//! Extreme eigenvalues by thick-restart Lanczos, dense spectra, Hausdorff distance.

use faer::complex_native::c64;
use faer::{Mat, Side};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{HermitianOp, Negated};

type C = Complex64;
const ZERO: C = C::new(0.0, 0.0);

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    /// Target residual `‖Av − λv‖`.
    pub tol: f64,
    pub max_restarts: usize,
    /// Restart length; capped at the dimension.
    pub krylov_dim: usize,
    pub seed: u64,
    /// Warm start; a seeded random vector when absent.
    pub start: Option<Vec<C>>,
    /// Operators up to this size are diagonalised densely.
    pub dense_threshold: usize,
    /// Return the last Ritz pairs, with their true residuals, instead of
    /// failing when `max_restarts` is exhausted.
    pub best_effort: bool,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_restarts: 2000,
            krylov_dim: 40,
            seed: 0x5eed,
            start: None,
            dense_threshold: 200,
            best_effort: false,
        }
    }
}

impl LanczosOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<C>,
    pub residual: f64,
    /// Matrix-vector products used.
    pub iterations: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub spectrum: Option<Vec<f64>>,
    pub residual: f64,
    pub iterations: usize,
}

pub(crate) fn dot(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[C]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(alpha: C, x: &[C], y: &mut [C]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn scale(v: &mut [C], s: f64) {
    v.iter_mut().for_each(|z| *z *= s);
}

fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<C> {
    (0..n).map(|_| C::new(rng.gen_range(-1.0..1.0), 0.0)).collect()
}

/// `‖Av − λv‖` for a unit `v`.
pub fn residual<O: HermitianOp + ?Sized>(op: &O, value: f64, v: &[C]) -> f64 {
    let mut w = vec![ZERO; v.len()];
    op.apply(v, &mut w);
    axpy(C::new(-value, 0.0), v, &mut w);
    norm(&w)
}

/// Dense copy of an operator, column by column.
pub fn densify<O: HermitianOp + ?Sized>(op: &O) -> DMatrix<C> {
    let n = op.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![ZERO; n];
    let mut col = vec![ZERO; n];
    for j in 0..n {
        e[j] = C::new(1.0, 0.0);
        op.apply(&e, &mut col);
        for i in 0..n {
            m[(i, j)] = col[i];
        }
        e[j] = ZERO;
    }
    m
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
/// Uses the real solver when every imaginary part is zero.
pub fn dense_eigen(a: &DMatrix<C>) -> (Vec<f64>, DMatrix<C>) {
    let n = a.nrows();
    if a.iter().all(|z| z.im == 0.0) {
        let m = Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (a[(i, j)].re + a[(j, i)].re));
        let eig = m.selfadjoint_eigendecomposition(Side::Lower);
        let vals = (0..n).map(|i| eig.s().column_vector().read(i)).collect();
        let u = eig.u();
        (vals, DMatrix::from_fn(n, n, |i, j| C::new(u.read(i, j), 0.0)))
    } else {
        let m = Mat::<c64>::from_fn(n, n, |i, j| {
            let z = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            c64::new(z.re, z.im)
        });
        let eig = m.selfadjoint_eigendecomposition(Side::Lower);
        let vals = (0..n).map(|i| eig.s().column_vector().read(i).re).collect();
        let u = eig.u();
        (vals, DMatrix::from_fn(n, n, |i, j| {
            let z = u.read(i, j);
            C::new(z.re, z.im)
        }))
    }
}

fn dense_top<O: HermitianOp + ?Sized>(op: &O, nev: usize) -> Vec<Eigenpair> {
    let a = densify(op);
    let n = a.nrows();
    let (vals, vecs) = dense_eigen(&a);
    (0..nev)
        .map(|k| {
            let idx = n - 1 - k;
            let v: Vec<C> = vecs.column(idx).iter().copied().collect();
            let value = vals[idx];
            Eigenpair { residual: residual(op, value, &v), value, vector: v, iterations: n }
        })
        .collect()
}

/// The `nev` largest eigenpairs, largest first.
pub fn largest_eigenpairs<O: HermitianOp + ?Sized>(
    op: &O,
    nev: usize,
    opts: &LanczosOptions,
) -> Result<Vec<Eigenpair>> {
    let n = op.dim();
    if n == 0 {
        return Err(Error::EmptyInput("operator of dimension 0"));
    }
    let nev = nev.clamp(1, n);
    let m = opts.krylov_dim.max(2 * nev + 4).min(n);
    if n <= opts.dense_threshold || m >= n {
        return Ok(dense_top(op, nev));
    }
    let keep = (m / 2).max(nev + 1).min(m - 2);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut v0 = match &opts.start {
        Some(s) if s.len() == n && norm(s) > 0.0 => s.clone(),
        _ => random_vector(n, &mut rng),
    };
    let nv = norm(&v0);
    scale(&mut v0, 1.0 / nv);

    let mut q: Vec<Vec<C>> = vec![v0];
    let mut h = DMatrix::<C>::zeros(m, m);
    let mut locked = 0usize;
    let mut w = vec![ZERO; n];
    let mut matvecs = 0usize;
    let mut best_residual = f64::INFINITY;
    let mut op_scale = 0.0f64;
    let mut last: Vec<(f64, Vec<C>)> = Vec::new();

    for _restart in 0..opts.max_restarts {
        let beta_last;
        let mut j = locked;
        loop {
            op.apply(&q[j], &mut w);
            matvecs += 1;
            let mut hcol = vec![ZERO; j + 1];
            for _pass in 0..2 {
                for i in 0..=j {
                    let c = dot(&q[i], &w);
                    hcol[i] += c;
                    axpy(-c, &q[i], &mut w);
                }
            }
            for (i, c) in hcol.iter().enumerate() {
                h[(i, j)] = *c;
            }
            op_scale = op_scale.max(hcol[j].norm());
            let beta = norm(&w);
            op_scale = op_scale.max(beta);
            if j + 1 == m {
                beta_last = beta;
                break;
            }
            if beta <= 1e-12 * op_scale.max(1.0) {
                let mut fresh = random_vector(n, &mut rng);
                for _pass in 0..2 {
                    for qi in &q {
                        let c = dot(qi, &fresh);
                        axpy(-c, qi, &mut fresh);
                    }
                }
                let nf = norm(&fresh);
                scale(&mut fresh, 1.0 / nf);
                q.push(fresh);
            } else {
                let mut next = w.clone();
                scale(&mut next, 1.0 / beta);
                q.push(next);
            }
            j += 1;
        }

        let hs = DMatrix::from_fn(m, m, |i, k| {
            if i == k {
                C::new(h[(i, i)].re, 0.0)
            } else if i < k {
                h[(i, k)]
            } else {
                h[(k, i)].conj()
            }
        });
        let (vals, vecs) = dense_eigen(&hs);
        let top = |k: usize| m - 1 - k;
        let ritz_res: Vec<f64> = (0..nev).map(|k| beta_last * vecs[(m - 1, top(k))].norm()).collect();
        let worst = ritz_res.iter().copied().fold(0.0, f64::max);
        best_residual = best_residual.min(worst);

        let ritz_vector = |k: usize| -> Vec<C> {
            let mut y = vec![ZERO; n];
            for (i, qi) in q.iter().enumerate() {
                axpy(vecs[(i, top(k))], qi, &mut y);
            }
            let ny = norm(&y);
            scale(&mut y, 1.0 / ny);
            y
        };

        if worst <= opts.tol {
            let pairs: Vec<Eigenpair> = (0..nev)
                .map(|k| {
                    let v = ritz_vector(k);
                    let value = vals[top(k)];
                    Eigenpair { residual: residual(op, value, &v), value, vector: v, iterations: matvecs }
                })
                .collect();
            matvecs += nev;
            if pairs.iter().all(|p| p.residual <= opts.tol * 1.5) {
                return Ok(pairs);
            }
        }

        let mut new_q: Vec<Vec<C>> = (0..keep).map(ritz_vector).collect();
        if opts.best_effort {
            last = (0..nev).map(|k| (vals[top(k)], new_q[k].clone())).collect();
        }
        let mut resid = w.clone();
        for _pass in 0..2 {
            for y in &new_q {
                let c = dot(y, &resid);
                axpy(-c, y, &mut resid);
            }
        }
        let nr = norm(&resid);
        if nr <= 1e-12 * op_scale.max(1.0) {
            resid = random_vector(n, &mut rng);
            for _pass in 0..2 {
                for y in &new_q {
                    let c = dot(y, &resid);
                    axpy(-c, y, &mut resid);
                }
            }
            let nr2 = norm(&resid);
            scale(&mut resid, 1.0 / nr2);
        } else {
            scale(&mut resid, 1.0 / nr);
        }
        new_q.push(resid);
        q = new_q;
        h.fill(ZERO);
        for k in 0..keep {
            h[(k, k)] = C::new(vals[top(k)], 0.0);
        }
        locked = keep;
    }
    if opts.best_effort && !last.is_empty() {
        return Ok(last
            .into_iter()
            .map(|(value, v)| Eigenpair { residual: residual(op, value, &v), value, vector: v, iterations: matvecs })
            .collect());
    }
    Err(Error::NonConvergence { restarts: opts.max_restarts, residual: best_residual })
}

/// Largest eigenpair.
pub fn lambda_max_pair<O: HermitianOp + ?Sized>(op: &O, opts: &LanczosOptions) -> Result<Eigenpair> {
    Ok(largest_eigenpairs(op, 1, opts)?.remove(0))
}

pub fn lambda_max<O: HermitianOp + ?Sized>(op: &O, tol: f64) -> Result<f64> {
    Ok(lambda_max_pair(op, &LanczosOptions::with_tol(tol))?.value)
}

pub fn lambda_min<O: HermitianOp>(op: &O, tol: f64) -> Result<f64> {
    Ok(-lambda_max(&Negated(op), tol)?)
}

/// All eigenvalues, ascending. Residuals are checked on a sample of eigenvectors.
pub fn full_spectrum<O: HermitianOp + ?Sized>(op: &O, cutoff_dim: usize) -> Result<Vec<f64>> {
    let n = op.dim();
    if n > cutoff_dim {
        return Err(Error::DimensionOverCutoff { dim: n, cutoff: cutoff_dim });
    }
    if n == 0 {
        return Err(Error::EmptyInput("operator of dimension 0"));
    }
    let a = densify(op);
    let (vals, vecs) = dense_eigen(&a);
    let samples = 16.min(n);
    for s in 0..samples {
        let k = if samples == 1 { 0 } else { s * (n - 1) / (samples - 1) };
        let v: Vec<C> = vecs.column(k).iter().copied().collect();
        let res = residual(op, vals[k], &v);
        if res > 1e-9 {
            return Err(Error::NonConvergence { restarts: 0, residual: res });
        }
    }
    Ok(vals)
}

/// Extreme eigenvalues, plus the full spectrum when `dim ≤ cutoff_dim`.
pub fn summarize<O: HermitianOp>(op: &O, tol: f64, cutoff_dim: usize) -> Result<SpectrumSummary> {
    if op.dim() <= cutoff_dim {
        let spec = full_spectrum(op, cutoff_dim)?;
        return Ok(SpectrumSummary {
            lambda_max: *spec.last().unwrap(),
            lambda_min: spec[0],
            residual: 1e-9,
            iterations: op.dim(),
            spectrum: Some(spec),
        });
    }
    let opts = LanczosOptions::with_tol(tol);
    let top = lambda_max_pair(op, &opts)?;
    let bottom = lambda_max_pair(&Negated(op), &opts)?;
    Ok(SpectrumSummary {
        lambda_max: top.value,
        lambda_min: -bottom.value,
        spectrum: None,
        residual: top.residual.max(bottom.residual),
        iterations: top.iterations + bottom.iterations,
    })
}

/// Symmetric Hausdorff distance between two finite point sets on the line.
pub fn hausdorff(s: &[f64], t: &[f64]) -> Result<f64> {
    if s.is_empty() || t.is_empty() {
        return Err(Error::EmptyInput("hausdorff needs two nonempty sets"));
    }
    let mut ss = s.to_vec();
    let mut ts = t.to_vec();
    ss.sort_by(f64::total_cmp);
    ts.sort_by(f64::total_cmp);
    Ok(directed(&ss, &ts).max(directed(&ts, &ss)))
}

fn directed(from: &[f64], to: &[f64]) -> f64 {
    from.iter()
        .map(|&x| {
            let k = to.partition_point(|&y| y < x);
            let mut d = f64::INFINITY;
            if k < to.len() {
                d = d.min(to[k] - x);
            }
            if k > 0 {
                d = d.min(x - to[k - 1]);
            }
            d
        })
        .fold(0.0, f64::max)
}
