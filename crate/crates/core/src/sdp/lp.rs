//! Dense two-phase simplex for `max cᵀx` subject to `Ax = b`, `x ≥ 0`.
//!
//! Bland's rule throughout, so the method terminates and the vertex it returns
//! depends only on the input.

use crate::error::{Error, Result};

const EPS: f64 = 1e-11;

/// A basic optimal solution.
#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    /// Indices of the basic columns (artificials excluded).
    pub basis: Vec<usize>,
}

struct Tableau {
    /// `m` constraint rows followed by the objective row, each `n + 1` wide
    /// (the last entry is the right-hand side).
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    m: usize,
    n: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col];
        self.t[row].iter_mut().for_each(|x| *x /= p);
        let pivot_row = self.t[row].clone();
        for (i, r) in self.t.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for (x, y) in r.iter_mut().zip(&pivot_row) {
                    *x -= f * y;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Minimises the objective row over the columns in `allowed`.
    /// Returns `false` on unboundedness.
    fn run(&mut self, allowed: usize) -> bool {
        loop {
            let obj = &self.t[self.m];
            let Some(col) = (0..allowed).find(|&j| obj[j] < -EPS) else {
                return true;
            };
            let mut best: Option<(f64, usize)> = None;
            for i in 0..self.m {
                let a = self.t[i][col];
                if a > EPS {
                    let ratio = self.t[i][self.n] / a;
                    let better = match best {
                        None => true,
                        Some((r, k)) => {
                            ratio < r - EPS || (ratio <= r + EPS && self.basis[i] < self.basis[k])
                        }
                    };
                    if better {
                        best = Some((ratio, i));
                    }
                }
            }
            match best {
                Some((_, row)) => self.pivot(row, col),
                None => return false,
            }
        }
    }
}

/// `a` is row-major `m × n`. Returns [`Error::LpInfeasible`] when no
/// nonnegative solution exists or the objective is unbounded.
pub fn solve_equality_lp(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<LpSolution> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(Error::Validation("lp dimensions disagree".into()));
    }
    let width = n + m;
    let mut t = Vec::with_capacity(m + 1);
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; width + 1];
        for j in 0..n {
            row[j] = sign * a[i][j];
        }
        row[n + i] = 1.0;
        row[width] = sign * b[i];
        t.push(row);
    }
    // phase one: minimise the sum of artificials
    let mut obj = vec![0.0; width + 1];
    for row in &t {
        for j in 0..n {
            obj[j] -= row[j];
        }
        obj[width] -= row[width];
    }
    t.push(obj);
    let mut tab = Tableau { t, basis: (n..n + m).collect(), m, n: width };
    tab.run(n);
    let infeas = -tab.t[m][width];
    let scale = 1.0 + b.iter().map(|x| x.abs()).sum::<f64>();
    if infeas > 1e-9 * scale {
        return Err(Error::LpInfeasible);
    }
    // drive artificials out of the basis where possible
    for i in 0..m {
        if tab.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| tab.t[i][j].abs() > 1e-9) {
                tab.pivot(i, j);
            }
        }
    }
    // phase two
    let mut obj = vec![0.0; width + 1];
    for j in 0..n {
        obj[j] = -c[j];
    }
    for i in 0..m {
        let bj = tab.basis[i];
        if bj < n && c[bj] != 0.0 {
            let f = c[bj];
            for (o, x) in obj.iter_mut().zip(&tab.t[i]) {
                *o += f * x;
            }
        }
    }
    tab.t[m] = obj;
    if !tab.run(n) {
        return Err(Error::LpInfeasible);
    }
    let mut x = vec![0.0; n];
    let mut basis = Vec::new();
    for i in 0..m {
        let bj = tab.basis[i];
        if bj < n {
            x[bj] = tab.t[i][width].max(0.0);
            basis.push(bj);
        }
    }
    basis.sort_unstable();
    let value = c.iter().zip(&x).map(|(p, q)| p * q).sum();
    Ok(LpSolution { x, value, basis })
}
