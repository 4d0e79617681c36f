//! Turns a nearly feasible Gram solution into an exactly feasible one:
//! shrink until no class is over its target, then top up each deficient class
//! on its designated diagonal entry.

use super::{GramSolution, C};
use crate::error::{Error, Result};
use crate::operator::SparseHermitianOperator;

/// Worst-case objective change of [`repair_feasibility`]: `C · m · η` with
/// `C = 2 m ‖A‖`, where `m` is the number of classes.
pub fn repair_bound(norm_a: f64, classes: usize, eta: f64) -> f64 {
    let m = classes as f64;
    2.0 * m * norm_a * m * eta
}

/// Fails with [`Error::EtaExceeded`] when some class residual exceeds `eta`.
/// The added diagonal mass is nonnegative, so the result stays PSD, and its
/// support grows by at most one row per class.
pub fn repair_feasibility(sol: &GramSolution, a: &SparseHermitianOperator, eta: f64) -> Result<GramSolution> {
    let partition = sol.partition;
    let rows = sol.factor.rows;
    let m = partition.num_classes(rows);
    let traces = sol.factor.class_traces(partition);
    let target = partition.target(rows);
    let worst = traces.iter().map(|t| (t - target).abs()).fold(0.0, f64::max);
    if worst > eta {
        return Err(Error::EtaExceeded { residual: worst, eta });
    }
    let eps = traces.iter().map(|&t| m as f64 * t - 1.0).fold(0.0, f64::max);
    let mut f = sol.factor.clone();
    if eps > 0.0 {
        let s = 1.0 / (1.0 + eps).sqrt();
        f.data.iter_mut().for_each(|z| *z *= s);
    }
    let shrunk = f.class_traces(partition);
    let mut col = vec![C::new(0.0, 0.0); rows];
    for (j, &t) in shrunk.iter().enumerate() {
        let delta = target - t;
        if delta > 0.0 {
            col.iter_mut().for_each(|z| *z = C::new(0.0, 0.0));
            let d = partition.designated(j);
            col[d] = C::new(delta.sqrt(), 0.0);
            f.push_column(&col);
        }
    }
    let mut out = GramSolution::from_factor(a, f, partition);
    out.iterations = sol.iterations;
    out.converged = sol.converged;
    Ok(out)
}
