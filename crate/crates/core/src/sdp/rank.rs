//! Rank reduction: the optimum over `ρ`'s own eigenbasis is attained at an
//! LP vertex with at most one nonzero weight per constraint.

use nalgebra::DMatrix;

use super::lp::solve_equality_lp;
use super::{Factor, GramSolution, C, ZERO};
use crate::error::{Error, Result};
use crate::operator::SparseHermitianOperator;
use crate::spectral::dense_eigen;

/// Nonzero eigenpairs of `ρ = V V*` through the `k × k` Gram matrix `V* V`.
/// Eigenvalues descending; eigenvectors are columns of length `rows`, unit norm.
pub fn gram_eigen(v: &Factor) -> (Vec<f64>, Vec<Vec<C>>) {
    let k = v.k;
    let mut g = DMatrix::<C>::zeros(k, k);
    for i in 0..v.rows {
        let row = v.row(i);
        for a in 0..k {
            let ca = row[a].conj();
            for b in 0..k {
                g[(a, b)] += ca * row[b];
            }
        }
    }
    let (vals, vecs) = dense_eigen(&g);
    let scale = vals.iter().fold(0.0f64, |m, &x| m.max(x.abs())).max(1e-300);
    let mut mus = Vec::new();
    let mut us = Vec::new();
    for idx in (0..k).rev() {
        let mu = vals[idx];
        if mu <= 1e-14 * scale {
            continue;
        }
        let w = vecs.column(idx);
        let s = 1.0 / mu.sqrt();
        let u: Vec<C> = (0..v.rows)
            .map(|i| v.row(i).iter().zip(w.iter()).map(|(x, y)| x * y).sum::<C>() * s)
            .collect();
        mus.push(mu);
        us.push(u);
    }
    (mus, us)
}

/// Re-weights the eigenvectors of `ρ` through a vertex of
/// `max Σ λ_i u_i* A u_i` subject to the diagonal constraints and `λ ≥ 0`.
/// The output has rank at most the number of constraint classes.
pub fn reduce_rank(sol: &GramSolution, a: &SparseHermitianOperator) -> Result<GramSolution> {
    let partition = sol.partition;
    let rows = sol.factor.rows;
    let classes = partition.num_classes(rows);
    let (mus, us) = gram_eigen(&sol.factor);
    if us.is_empty() {
        return Err(Error::EmptyInput("zero solution"));
    }
    let cols = Factor::from_columns(&us);
    let au = cols.left_mul(a);
    let gains: Vec<f64> = (0..us.len())
        .map(|c| (0..rows).map(|i| (cols.row(i)[c].conj() * au.row(i)[c]).re).sum())
        .collect();
    let mut mass = vec![vec![0.0; us.len()]; classes];
    for (c, u) in us.iter().enumerate() {
        for (i, z) in u.iter().enumerate() {
            mass[partition.class_of(i)][c] += z.norm_sqr();
        }
    }
    let target = vec![partition.target(rows); classes];
    let lp = solve_equality_lp(&mass, &target, &gains)?;
    let mut columns = Vec::new();
    for (c, &w) in lp.x.iter().enumerate() {
        if w > 0.0 {
            let s = w.sqrt();
            columns.push(us[c].iter().map(|z| z * s).collect::<Vec<_>>());
        }
    }
    if columns.is_empty() {
        columns.push(vec![ZERO; rows]);
    }
    let mut f = Factor::from_columns(&columns);
    f.normalize_classes(partition);
    let mut out = GramSolution::from_factor(a, f, partition);
    out.iterations = sol.iterations;
    out.converged = sol.converged;
    log::debug!(
        "rank reduction: {} -> {} (objective {:.12} -> {:.12}, lp {:.12}, input weights {})",
        mus.len(),
        out.factor.k,
        sol.objective,
        out.objective,
        lp.value,
        mus.len()
    );
    Ok(out)
}
