//! Independent reference implementations used as test oracles.

#![allow(dead_code)]

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use rand::Rng;

use liftsdp::operator::SparseHermitianOperator;
use liftsdp::word::{Letter, Word};

/// Prints a criterion verdict past the test harness's output capture.
pub fn verdict(name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{tag} {name}: {detail}");
    let _ = out.flush();
}

/// Random Hermitian matrix with entries in the unit box; real when `real`.
pub fn random_hermitian<R: Rng>(n: usize, real: bool, rng: &mut R) -> DMatrix<C> {
    let mut a = DMatrix::from_element(n, n, C::new(0.0, 0.0));
    for i in 0..n {
        a[(i, i)] = C::new(rng.gen_range(-1.0..1.0), 0.0);
        for j in i + 1..n {
            let im = if real { 0.0 } else { rng.gen_range(-1.0..1.0) };
            let z = C::new(rng.gen_range(-1.0..1.0), im);
            a[(i, j)] = z;
            a[(j, i)] = z.conj();
        }
    }
    a
}

pub fn dense_lambda_max(a: &DMatrix<C>) -> f64 {
    a.clone().symmetric_eigen().eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// `(1/N) max_x x* A x` over `x ∈ {±1}^N` by plain enumeration.
pub fn brute_opt(a: &DMatrix<C>) -> f64 {
    let n = a.nrows();
    let mut best = f64::NEG_INFINITY;
    for mask in 0u64..(1 << n) {
        let x: Vec<f64> = (0..n).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
        let mut v = 0.0;
        for i in 0..n {
            for j in 0..n {
                v += a[(i, j)].re * x[i] * x[j];
            }
        }
        best = best.max(v);
    }
    best / n as f64
}

fn cholesky_ok(s: &DMatrix<C>) -> Option<DMatrix<C>> {
    s.clone().cholesky().map(|c| c.inverse())
}

/// Basic SDP value `max ⟨ρ, A⟩` over `ρ ⪰ 0`, `ρ_ii = 1/N`, by a log-barrier
/// method on the dual `min (1/N) Σ y_i` s.t. `Diag(y) − A ⪰ 0`. By strong
/// duality the result equals the primal value to within `N / t_final`.
pub fn ipm_sdp(a: &DMatrix<C>) -> f64 {
    let n = a.nrows();
    assert!(n <= 30, "oracle is for small instances");
    let nf = n as f64;
    let gersh = (0..n).map(|i| (0..n).map(|j| a[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max);
    let mut y = DVector::from_element(n, gersh + 1.0);
    let slack = |y: &DVector<f64>| {
        let mut s = -a.clone();
        for i in 0..n {
            s[(i, i)] += C::new(y[i], 0.0);
        }
        s
    };
    let mut t = 1.0;
    while nf / t > 1e-10 {
        for _ in 0..200 {
            let sinv = cholesky_ok(&slack(&y)).expect("iterate stays interior");
            let g = DVector::from_fn(n, |i, _| t / nf - sinv[(i, i)].re);
            let h = DMatrix::from_fn(n, n, |i, j| sinv[(i, j)].norm_sqr());
            let dy = -h.cholesky().expect("barrier Hessian is positive definite").solve(&g);
            let decrement = -g.dot(&dy);
            let mut step = 1.0;
            while cholesky_ok(&slack(&(&y + &dy * step))).is_none() {
                step *= 0.5;
            }
            let phi = |y: &DVector<f64>| {
                let s = slack(y);
                let logdet: f64 = s.cholesky().unwrap().l().diagonal().iter().map(|d| 2.0 * d.re.ln()).sum();
                t * y.sum() / nf - logdet
            };
            let f0 = phi(&y);
            while phi(&(&y + &dy * step)) > f0 - 0.25 * step * decrement && step > 1e-12 {
                step *= 0.5;
            }
            y += &dy * step;
            if decrement < 1e-12 {
                break;
            }
        }
        t *= 8.0;
    }
    y.sum() / nf
}

pub fn to_operator(a: &DMatrix<C>) -> SparseHermitianOperator {
    SparseHermitianOperator::from_dense(a)
}

/// Free reduction by repeatedly deleting the leftmost cancelling pair.
pub fn naive_reduce(w: &Word) -> Word {
    let mut v: Vec<Letter> = w.letters().to_vec();
    loop {
        match (0..v.len().saturating_sub(1)).find(|&k| v[k + 1] == v[k].inverse()) {
            Some(k) => {
                v.drain(k..k + 2);
            }
            None => return Word::from_letters(v),
        }
    }
}
