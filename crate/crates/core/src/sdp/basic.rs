//! Basic SDP primal: `max ⟨ρ, A⟩` over `ρ ⪰ 0`, `ρ_ii = 1/N`, by coordinate
//! ascent on a low-rank factor with unit rows (the mixing method).

use rand::SeedableRng;
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::{pick_best, Factor, GramSolution, Partition, SolverParams, C, ZERO};
use crate::error::{Error, Result};
use crate::operator::SparseHermitianOperator;

/// Smallest `k` with `k (k + 1) / 2 > m`, capped at `n`.
pub fn barvinok_rank(m: usize, n: usize) -> usize {
    let mut k = 1;
    while k * (k + 1) / 2 <= m {
        k += 1;
    }
    k.min(n).max(1)
}

/// Best of `params.restarts` mixing-method runs. Rows are exactly normalised,
/// so every returned solution is feasible and its objective a valid lower bound.
pub fn sdp_primal(a: &SparseHermitianOperator, params: &SolverParams) -> Result<GramSolution> {
    let n = a.dim();
    if n == 0 {
        return Err(Error::EmptyInput("empty matrix"));
    }
    let k = params.rank.unwrap_or_else(|| barvinok_rank(n, n));
    let runs: Vec<GramSolution> = (0..params.restarts.max(1))
        .into_par_iter()
        .map(|restart| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(restart as u64);
            let sol = mixing_run(a, k, params, &mut rng);
            log::debug!("sdp restart {restart}: objective {:.10}", sol.objective);
            sol
        })
        .collect();
    let best = pick_best(runs);
    if !best.converged {
        log::warn!(
            "sdp primal stopped after {} sweeps without meeting tol; objective {:.8} is still feasible",
            best.iterations,
            best.objective
        );
    }
    Ok(best)
}

/// Factor entries: `f64` when `A` is real, complex otherwise.
trait Entry: Copy + std::ops::AddAssign + std::ops::Mul<Output = Self> {
    const ZERO: Self;
    fn from_c(z: C) -> Self;
    fn to_c(self) -> C;
    fn norm_sqr(self) -> f64;
    fn scale(self, s: f64) -> Self;
    /// `Re(conj(self) · other)`.
    fn re_dot(self, other: Self) -> f64;
}

impl Entry for f64 {
    const ZERO: Self = 0.0;
    fn from_c(z: C) -> Self {
        z.re
    }
    fn to_c(self) -> C {
        C::new(self, 0.0)
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn re_dot(self, other: Self) -> f64 {
        self * other
    }
}

impl Entry for C {
    const ZERO: Self = ZERO;
    fn from_c(z: C) -> Self {
        z
    }
    fn to_c(self) -> C {
        self
    }
    fn norm_sqr(self) -> f64 {
        C::norm_sqr(&self)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn re_dot(self, other: Self) -> f64 {
        (self.conj() * other).re
    }
}

fn mixing_run(a: &SparseHermitianOperator, k: usize, params: &SolverParams, rng: &mut ChaCha8Rng) -> GramSolution {
    let mut u = Factor::random(a.dim(), k, rng);
    for i in 0..u.rows {
        normalize(u.row_mut(i));
    }
    let start = u.objective(a);
    let (data, sweeps, converged) = if a.is_real() {
        let vals = |z: C| z.re;
        let data = sweep_until(a, u.data.iter().map(|&z| f64::from_c(z)).collect(), k, start, vals, params);
        (data.0.into_iter().map(Entry::to_c).collect(), data.1, data.2)
    } else {
        let data = sweep_until(a, u.data, k, start, |z| z, params);
        (data.0, data.1, data.2)
    };
    u.data = data;
    let n = u.rows;
    let scale = 1.0 / (n as f64).sqrt();
    u.data.iter_mut().for_each(|z| *z *= scale);
    let mut sol = GramSolution::from_factor(a, u, Partition::Rows);
    sol.iterations = sweeps;
    sol.converged = converged;
    sol
}

/// Mixing sweeps on unit rows until the per-sweep gain of `⟨UU*, A⟩ / n` is
/// below `tol` relative to the objective. The gain of one row update is
/// `2 (|g| − Re⟨u_old, g⟩)`, so the objective is tracked without extra passes.
fn sweep_until<T: Entry>(
    a: &SparseHermitianOperator,
    mut u: Vec<T>,
    k: usize,
    start: f64,
    conv: impl Fn(C) -> T,
    params: &SolverParams,
) -> (Vec<T>, usize, bool) {
    let n = a.dim();
    let mut ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    ptr.push(0);
    for i in 0..n {
        for (j, v) in a.row(i) {
            if j != i {
                cols.push(j);
                vals.push(conv(v));
            }
        }
        ptr.push(cols.len());
    }
    let mut obj = start;
    let mut g = vec![T::ZERO; k];
    let mut sweeps = 0;
    while sweeps < params.max_iters {
        sweeps += 1;
        let mut gain = 0.0;
        for i in 0..n {
            g.iter_mut().for_each(|z| *z = T::ZERO);
            for (&j, &v) in cols[ptr[i]..ptr[i + 1]].iter().zip(&vals[ptr[i]..ptr[i + 1]]) {
                for (gc, &x) in g.iter_mut().zip(&u[j * k..(j + 1) * k]) {
                    *gc += v * x;
                }
            }
            let norm = g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-300 {
                let ui = &mut u[i * k..(i + 1) * k];
                let old: f64 = ui.iter().zip(&g).map(|(x, y)| x.re_dot(*y)).sum();
                gain += 2.0 * (norm - old);
                for (dst, src) in ui.iter_mut().zip(&g) {
                    *dst = src.scale(1.0 / norm);
                }
            }
        }
        let gain = gain / n as f64;
        obj += gain;
        if gain.abs() <= params.tol * (1.0 + obj.abs()) {
            return (u, sweeps, true);
        }
    }
    (u, sweeps, false)
}

fn normalize(row: &mut [C]) {
    let norm: f64 = row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        row.iter_mut().for_each(|z| *z /= norm);
    } else {
        row[0] = C::new(1.0, 0.0);
    }
}
