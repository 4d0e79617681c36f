//! Dual bounds `inf_ζ λ_max(A + Σ_j ζ_j I_j)` over `Σ_j ζ_j = 0`.
//!
//! Every evaluated `ζ` gives a valid upper bound, so the solver only has to
//! remember the best one. The search starts from the multipliers read off a
//! primal solution and is refined by Polyak subgradient steps.

use super::{DualCertificate, GramSolution, Partition, SolverParams};
use crate::ball::TruncatedAdjacency;
use crate::error::{Error, Result};
use crate::operator::{HermitianOp, Shifted, SparseHermitianOperator};
use crate::spectral::{lambda_max_pair, Eigenpair, LanczosOptions};

/// Largest number of colours accepted by [`part_sdp_dual`].
pub const MAX_DUAL_COLORS: usize = 64;

/// `λ_max(A + Σ_j ζ_j I_j)` together with its top eigenpair.
pub fn dual_value<O: HermitianOp>(
    a: &O,
    partition: Partition,
    zeta: &[f64],
    opts: &LanczosOptions,
) -> Result<Eigenpair> {
    let shift = partition.shift(zeta, a.dim());
    lambda_max_pair(&Shifted::new(a, shift), opts)
}

/// Multipliers that make a primal solution stationary: with
/// `y_j = m ⟨ρ, A I_j⟩`, `ζ = mean(y) − y`.
pub fn kkt_multipliers(sol: &GramSolution, a: &SparseHermitianOperator) -> Vec<f64> {
    let partition = sol.partition;
    let rows = sol.factor.rows;
    let m = partition.num_classes(rows);
    let av = sol.factor.left_mul(a);
    let mut y = vec![0.0; m];
    for i in 0..rows {
        let d: f64 = sol.factor.row(i).iter().zip(av.row(i)).map(|(p, q)| (p.conj() * q).re).sum();
        y[partition.class_of(i)] += m as f64 * d;
    }
    let mean = y.iter().sum::<f64>() / m as f64;
    y.iter().map(|v| mean - v).collect()
}

fn recenter(z: &mut [f64]) {
    let mean = z.iter().sum::<f64>() / z.len() as f64;
    z.iter_mut().for_each(|x| *x -= mean);
}

/// Minimises the dual over avg-zero `ζ`. With a primal solution the search is
/// warm-started at its multipliers and stops once within `gap_tol` of it.
pub fn refine_dual(
    a: &SparseHermitianOperator,
    partition: Partition,
    primal: Option<&GramSolution>,
    params: &SolverParams,
) -> Result<DualCertificate> {
    let n = a.dim();
    if !partition.matches(n) {
        return Err(Error::Validation(format!("partition {partition:?} does not fit dimension {n}")));
    }
    let m = partition.num_classes(n);
    let mut opts = LanczosOptions::with_tol(params.eig_tol);
    opts.seed = params.seed;
    let target = primal.map(|p| p.objective);

    let mut best_zeta = vec![0.0; m];
    let mut pair = dual_value(a, partition, &best_zeta, &opts)?;
    let mut best = pair.clone();
    if let Some(p) = primal {
        let mut z = kkt_multipliers(p, a);
        recenter(&mut z);
        opts.start = Some(pair.vector.clone());
        let cand = dual_value(a, partition, &z, &opts)?;
        if cand.value < best.value {
            best = cand.clone();
            best_zeta = z;
            pair = cand;
        }
    }
    let mut zeta = best_zeta.clone();
    let mut mu = 1.0;
    let mut stall = 0;
    let mut iterations = 0;
    for t in 1..=params.dual_iters {
        if let Some(p) = target {
            if best.value - p <= params.gap_tol {
                break;
            }
        }
        iterations = t;
        let mut g = vec![-1.0 / m as f64; m];
        for (i, z) in pair.vector.iter().enumerate() {
            g[partition.class_of(i)] += z.norm_sqr();
        }
        recenter(&mut g);
        let gn2: f64 = g.iter().map(|x| x * x).sum();
        if gn2 < 1e-28 {
            break;
        }
        let step = match target {
            Some(p) => mu * (pair.value - p).max(0.5 * params.gap_tol) / gn2,
            None => 1.0 / (t as f64 * gn2.sqrt()),
        };
        for (z, gj) in zeta.iter_mut().zip(&g) {
            *z -= step * gj;
        }
        recenter(&mut zeta);
        opts.start = Some(pair.vector.clone());
        pair = dual_value(a, partition, &zeta, &opts)?;
        if pair.value < best.value {
            best = pair.clone();
            best_zeta.copy_from_slice(&zeta);
            stall = 0;
        } else {
            stall += 1;
            if stall >= 10 {
                mu *= 0.5;
                stall = 0;
                zeta.copy_from_slice(&best_zeta);
                pair = best.clone();
            }
        }
    }
    Ok(DualCertificate { zeta: best_zeta, value: best.value, residual: best.residual, iterations })
}

/// Basic SDP dual; runs the primal first for the warm start and the target.
pub fn sdp_dual(a: &SparseHermitianOperator, params: &SolverParams) -> Result<DualCertificate> {
    let primal = super::sdp_primal(a, params)?;
    refine_dual(a, Partition::Rows, Some(&primal), params)
}

/// Partitioned dual on a truncated ball, warm-started from a primal solution
/// when one is given.
pub fn part_sdp_dual(
    af: &TruncatedAdjacency,
    primal: Option<&GramSolution>,
    params: &SolverParams,
) -> Result<DualCertificate> {
    if af.r > MAX_DUAL_COLORS {
        return Err(Error::TooLarge { n: af.r, max: MAX_DUAL_COLORS });
    }
    refine_dual(&af.matrix, Partition::Colors(af.r), primal, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    #[test]
    fn diagonal_matrix_dual_is_mean() {
        let a = SparseHermitianOperator::from_triplets(
            3,
            vec![(0, 0, C::new(1.0, 0.0)), (1, 1, C::new(2.0, 0.0)), (2, 2, C::new(6.0, 0.0))],
        );
        let d = sdp_dual(&a, &SolverParams::default()).unwrap();
        assert!((d.value - 3.0).abs() < 1e-6, "{}", d.value);
        assert!(d.zeta.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn cycle_dual_is_eigenvalue() {
        let n = 5;
        let t = (0..n)
            .flat_map(|i| {
                let j = (i + 1) % n;
                [(i, j, C::new(-1.0, 0.0)), (j, i, C::new(-1.0, 0.0))]
            })
            .collect();
        let a = SparseHermitianOperator::from_triplets(n, t);
        let d = sdp_dual(&a, &SolverParams::default()).unwrap();
        let expected = 2.0 * (std::f64::consts::PI / 5.0).cos();
        assert!((d.value - expected).abs() < 1e-6);
    }
}
