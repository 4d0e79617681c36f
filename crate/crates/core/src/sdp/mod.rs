//! The bounds `Opt ≤ Sdp ≤ Eig` and the partitioned SDP, with dual certificates,
//! feasibility repair and rank reduction.
//!
//! Both SDPs share one shape: maximise `⟨ρ, A⟩` over `ρ = V V* ⪰ 0` with the
//! diagonal mass of each class of rows fixed. The basic SDP has one class per
//! row; the partitioned SDP on an `(n, r)` block layout has one class per colour.

pub mod basic;
pub mod dual;
pub mod lp;
pub mod opt;
pub mod partitioned;
pub mod rank;
pub mod repair;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::operator::SparseHermitianOperator;

pub use basic::sdp_primal;
pub use dual::{dual_value, part_sdp_dual, refine_dual, sdp_dual};
pub use opt::opt_bruteforce;
pub use partitioned::part_sdp_primal;
pub use rank::reduce_rank;
pub use repair::repair_feasibility;

type C = Complex64;
const ZERO: C = C::new(0.0, 0.0);

/// Which rows share a diagonal constraint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Partition {
    /// `ρ_ii = 1/N` for every row.
    Rows,
    /// Row `v r + j` belongs to class `j`; each class has total mass `1/r`.
    Colors(usize),
}

impl Partition {
    pub fn num_classes(&self, dim: usize) -> usize {
        match *self {
            Partition::Rows => dim,
            Partition::Colors(r) => r,
        }
    }

    #[inline]
    pub fn class_of(&self, row: usize) -> usize {
        match *self {
            Partition::Rows => row,
            Partition::Colors(r) => row % r,
        }
    }

    /// Required diagonal mass of each class.
    pub fn target(&self, dim: usize) -> f64 {
        1.0 / self.num_classes(dim) as f64
    }

    /// Lowest-indexed row of class `j`.
    pub fn designated(&self, j: usize) -> usize {
        j
    }

    /// Diagonal of `Σ_j ζ_j I_j`.
    pub fn shift(&self, zeta: &[f64], dim: usize) -> Vec<f64> {
        (0..dim).map(|i| zeta[self.class_of(i)]).collect()
    }

    pub fn matches(&self, dim: usize) -> bool {
        match *self {
            Partition::Rows => dim > 0,
            Partition::Colors(r) => r > 0 && dim % r == 0 && dim > 0,
        }
    }
}

/// Row-major `N × k` matrix `V` with `ρ = V V*`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub rows: usize,
    pub k: usize,
    pub data: Vec<C>,
}

impl Factor {
    pub fn zeros(rows: usize, k: usize) -> Self {
        Self { rows, k, data: vec![ZERO; rows * k] }
    }

    pub fn random<R: Rng>(rows: usize, k: usize, rng: &mut R) -> Self {
        let data = (0..rows * k).map(|_| C::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
        Self { rows, k, data }
    }

    /// Columns given as vectors of length `rows`.
    pub fn from_columns(cols: &[Vec<C>]) -> Self {
        let rows = cols.first().map_or(0, Vec::len);
        let k = cols.len();
        let mut f = Self::zeros(rows, k);
        for (c, col) in cols.iter().enumerate() {
            for (i, &z) in col.iter().enumerate() {
                f.data[i * k + c] = z;
            }
        }
        f
    }

    pub fn column(&self, c: usize) -> Vec<C> {
        (0..self.rows).map(|i| self.data[i * self.k + c]).collect()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[C] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [C] {
        &mut self.data[i * self.k..(i + 1) * self.k]
    }

    pub fn row_norm_sqr(&self, i: usize) -> f64 {
        self.row(i).iter().map(|z| z.norm_sqr()).sum()
    }

    /// `ρ_ij = ⟨v_j, v_i⟩`.
    pub fn entry(&self, i: usize, j: usize) -> C {
        self.row(i).iter().zip(self.row(j)).map(|(a, b)| a * b.conj()).sum()
    }

    pub fn trace(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `⟨ρ, I_j⟩` for every class.
    pub fn class_traces(&self, partition: Partition) -> Vec<f64> {
        let mut t = vec![0.0; partition.num_classes(self.rows)];
        for i in 0..self.rows {
            t[partition.class_of(i)] += self.row_norm_sqr(i);
        }
        t
    }

    /// `⟨ρ, I_j⟩ − target` for every class.
    pub fn residuals(&self, partition: Partition) -> Vec<f64> {
        let target = partition.target(self.rows);
        self.class_traces(partition).into_iter().map(|t| t - target).collect()
    }

    /// `A V`.
    pub fn left_mul(&self, a: &SparseHermitianOperator) -> Factor {
        let mut out = Factor::zeros(self.rows, self.k);
        for i in 0..self.rows {
            let dst = &mut out.data[i * self.k..(i + 1) * self.k];
            for (j, v) in a.row(i) {
                let src = &self.data[j * self.k..(j + 1) * self.k];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += v * s;
                }
            }
        }
        out
    }

    /// `Σ_i ⟨v_i, w_i⟩`, i.e. `tr(V* W)`.
    pub fn inner(&self, w: &Factor) -> C {
        self.data.iter().zip(&w.data).map(|(a, b)| a.conj() * b).sum()
    }

    /// `⟨ρ, A⟩`, with the imaginary residue.
    pub fn objective_parts(&self, a: &SparseHermitianOperator) -> C {
        self.inner(&self.left_mul(a))
    }

    pub fn objective(&self, a: &SparseHermitianOperator) -> f64 {
        let z = self.objective_parts(a);
        debug_assert!(z.im.abs() <= 1e-9 * (1.0 + z.re.abs()), "imaginary objective {z}");
        z.re
    }

    /// Scales the rows of each class so that its mass hits the target.
    /// Classes with zero mass get their designated row set to the target.
    pub fn normalize_classes(&mut self, partition: Partition) {
        let target = partition.target(self.rows);
        let traces = self.class_traces(partition);
        let scales: Vec<f64> = traces
            .iter()
            .map(|&t| if t > 0.0 { (target / t).sqrt() } else { 0.0 })
            .collect();
        for i in 0..self.rows {
            let s = scales[partition.class_of(i)];
            self.row_mut(i).iter_mut().for_each(|z| *z *= s);
        }
        for (j, &t) in traces.iter().enumerate() {
            if t <= 0.0 {
                let d = partition.designated(j);
                self.row_mut(d)[0] = C::new(target.sqrt(), 0.0);
            }
        }
    }

    /// Appends one column.
    pub fn push_column(&mut self, col: &[C]) {
        assert_eq!(col.len(), self.rows);
        let k2 = self.k + 1;
        let mut data = Vec::with_capacity(self.rows * k2);
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.push(col[i]);
        }
        self.k = k2;
        self.data = data;
    }
}

/// A feasible (or nearly feasible) Gram solution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GramSolution {
    pub factor: Factor,
    pub objective: f64,
    /// `⟨ρ, I_j⟩ − target` per class.
    pub residuals: Vec<f64>,
    pub partition: Partition,
    pub iterations: usize,
    pub converged: bool,
}

impl GramSolution {
    pub fn from_factor(a: &SparseHermitianOperator, factor: Factor, partition: Partition) -> Self {
        let objective = factor.objective(a);
        let residuals = factor.residuals(partition);
        Self { factor, objective, residuals, partition, iterations: 0, converged: true }
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub fn k(&self) -> usize {
        self.factor.k
    }

    /// Numerical rank of `ρ` (eigenvalues above `1e-10 · tr ρ`).
    pub fn rank(&self) -> usize {
        rank::gram_eigen(&self.factor)
            .0
            .iter()
            .filter(|&&mu| mu > 1e-10 * self.factor.trace().max(1e-300))
            .count()
    }
}

/// Highest objective, earliest run on ties.
pub(crate) fn pick_best(runs: Vec<GramSolution>) -> GramSolution {
    let mut best: Option<GramSolution> = None;
    for sol in runs {
        if best.as_ref().map_or(true, |b| sol.objective > b.objective) {
            best = Some(sol);
        }
    }
    best.expect("at least one run")
}

/// `λ_max(A + Σ_j ζ_j I_j)` with `Σ_j ζ_j = 0`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualCertificate {
    pub zeta: Vec<f64>,
    pub value: f64,
    /// Eigen-residual of the final evaluation.
    pub residual: f64,
    pub iterations: usize,
}

/// Lower and upper estimates of an SDP value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueBracket {
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
    pub lower_note: String,
    pub upper_note: String,
}

impl ValueBracket {
    pub fn new(lower: f64, upper: f64, lower_note: &str, upper_note: &str) -> Self {
        Self {
            lower,
            upper,
            gap: upper - lower,
            lower_note: lower_note.to_string(),
            upper_note: upper_note.to_string(),
        }
    }

    pub fn contains(&self, x: f64, slack: f64) -> bool {
        self.lower - slack <= x && x <= self.upper + slack
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverParams {
    /// Relative objective change below which an ascent run stops.
    pub tol: f64,
    pub max_iters: usize,
    pub restarts: usize,
    /// Factorisation rank; chosen from the constraint count when absent.
    pub rank: Option<usize>,
    pub seed: u64,
    pub dual_iters: usize,
    /// Residual target for eigen-solves.
    pub eig_tol: f64,
    /// Stop the dual once it is this close to the primal.
    pub gap_tol: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iters: 20_000,
            restarts: 5,
            rank: None,
            seed: 1,
            dual_iters: 2000,
            eig_tol: 1e-9,
            gap_tol: 1e-6,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_basics() {
        let f = Factor::from_columns(&[vec![C::new(1.0, 0.0), C::new(0.0, 1.0)]]);
        assert_eq!(f.entry(0, 1), C::new(0.0, -1.0));
        assert_eq!(f.class_traces(Partition::Rows), vec![1.0, 1.0]);
        let mut g = f.clone();
        g.normalize_classes(Partition::Colors(1));
        assert!((g.trace() - 1.0).abs() < 1e-15);
        g.push_column(&[C::new(0.0, 0.0), C::new(2.0, 0.0)]);
        assert_eq!(g.k, 2);
        assert_eq!(g.row(1)[1], C::new(2.0, 0.0));
    }

    #[test]
    fn objective_of_single_edge() {
        let a = SparseHermitianOperator::from_triplets(
            2,
            vec![(0, 1, C::new(-1.0, 0.0)), (1, 0, C::new(-1.0, 0.0))],
        );
        let h = 0.5f64.sqrt();
        let f = Factor::from_columns(&[vec![C::new(h, 0.0), C::new(-h, 0.0)]]);
        assert!((f.objective(&a) - 1.0).abs() < 1e-15);
    }
}
