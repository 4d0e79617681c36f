//! Partitioned SDP primal: `max ⟨ρ, A_F⟩` over `ρ ⪰ 0` with `⟨ρ, I_j⟩ = 1/r`.
//!
//! Generalised power iteration. On the feasible set `⟨ρ, A⟩ = ⟨ρ, B⟩ − s` for
//! `B = A + Id ⊗ diag(ζ) + s I` and any avg-zero `ζ`, and for `B ⪰ 0` the step
//! `V ← normalize_classes(B V)` never decreases the objective. `ζ` is kept at
//! the current stationarity multipliers and `s` is as small as ascent allows.

use rand::SeedableRng;
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::dual::kkt_multipliers;
use super::{pick_best, Factor, GramSolution, Partition, SolverParams};
use crate::ball::TruncatedAdjacency;
use crate::error::{Error, Result};
use crate::operator::{Shifted, SparseHermitianOperator};
use crate::spectral::{lambda_min, largest_eigenpairs, LanczosOptions};

/// `min(N, max(r + 2, ceil(√(2r))))`.
pub fn partitioned_rank(dim: usize, r: usize) -> usize {
    let root = ((2 * r) as f64).sqrt().ceil() as usize;
    dim.min((r + 2).max(root)).max(1)
}

/// Solves on a truncated ball; colours are the block colours of `A_F`.
pub fn part_sdp_primal(af: &TruncatedAdjacency, params: &SolverParams) -> Result<GramSolution> {
    part_sdp_primal_op(&af.matrix, af.r, params)
}

/// As [`part_sdp_primal`] for any operator whose dimension is a multiple of `r`.
pub fn part_sdp_primal_op(a: &SparseHermitianOperator, r: usize, params: &SolverParams) -> Result<GramSolution> {
    let n = a.dim();
    let partition = Partition::Colors(r);
    if n == 0 {
        return Err(Error::EmptyInput("empty matrix"));
    }
    if !partition.matches(n) {
        return Err(Error::Validation(format!("dimension {n} is not a multiple of r = {r}")));
    }
    let k = params.rank.unwrap_or_else(|| partitioned_rank(n, r)).min(n);
    let mut opts = LanczosOptions::with_tol(params.eig_tol.max(1e-10));
    opts.seed = params.seed;
    let top = largest_eigenpairs(a, k, &opts)?;
    let runs: Vec<GramSolution> = (0..params.restarts.max(1))
        .into_par_iter()
        .map(|restart| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(restart as u64);
            let mut v = Factor::random(n, k, &mut rng);
            if restart == 0 {
                let cols: Vec<Vec<_>> = top.iter().map(|p| p.vector.clone()).collect();
                let mut w = Factor::from_columns(&cols);
                // a small random component breaks exact eigenspace symmetry
                for (x, y) in w.data.iter_mut().zip(&v.data) {
                    *x += y * 1e-3;
                }
                v = w;
            }
            v.normalize_classes(partition);
            let sol = ascend(a, v, partition, params);
            log::debug!("partsdp restart {restart}: objective {:.12} after {} steps", sol.objective, sol.iterations);
            sol
        })
        .collect();
    let best = pick_best(runs);
    if !best.converged {
        log::warn!(
            "partitioned primal stopped after {} steps without meeting tol; objective {:.8} is still feasible",
            best.iterations,
            best.objective
        );
    }
    Ok(best)
}

fn ascend(a: &SparseHermitianOperator, mut v: Factor, partition: Partition, params: &SolverParams) -> GramSolution {
    let gersh = a.max_abs_row_sum().max(1e-300);
    let mut current = GramSolution::from_factor(a, v.clone(), partition);
    let mut zeta = kkt_multipliers(&current, a);
    let mut s = 0.0;
    let mut steps = 0;
    let mut quiet = 0;
    let mut converged = false;
    let mut safe_shift: Option<f64> = None;
    while steps < params.max_iters {
        steps += 1;
        let cap = gersh + zeta.iter().fold(0.0f64, |m, z| m.max(z.abs()));
        let av = v.left_mul(a);
        let (w, obj) = loop {
            let mut w = av.clone();
            for i in 0..w.rows {
                let shift = zeta[partition.class_of(i)] + s;
                let src = v.row(i).to_vec();
                for (d, x) in w.row_mut(i).iter_mut().zip(src) {
                    *d += x * shift;
                }
            }
            w.normalize_classes(partition);
            let obj = w.objective(a);
            if obj >= current.objective || s >= cap {
                break (w, obj);
            }
            s = if s == 0.0 { 1e-3 * gersh } else { (2.0 * s).min(cap) };
        };
        let gain = obj - current.objective;
        if gain < 0.0 {
            // stationary up to rounding
            converged = true;
            break;
        }
        v = w;
        current.objective = obj;
        if gain <= params.tol * (1.0 + obj.abs()) {
            let safe = *safe_shift.get_or_insert_with(|| psd_shift(a, &zeta, partition, cap));
            if s < safe {
                // an indefinite B can stall away from the optimum
                s = safe;
                quiet = 0;
                continue;
            }
            quiet += 1;
            if quiet >= 3 {
                converged = true;
                break;
            }
            continue;
        }
        quiet = 0;
        s *= 0.5;
        if steps % 10 == 0 {
            current = GramSolution::from_factor(a, v.clone(), partition);
            zeta = kkt_multipliers(&current, a);
            safe_shift = None;
        }
    }
    let mut out = GramSolution::from_factor(a, v, partition);
    out.iterations = steps;
    out.converged = converged;
    out
}

/// Smallest `s` with `A + Id ⊗ diag(ζ) + s I ⪰ 0`, or `cap` if the eigensolve fails.
fn psd_shift(a: &SparseHermitianOperator, zeta: &[f64], partition: Partition, cap: f64) -> f64 {
    let shift = partition.shift(zeta, a.dim());
    let op = Shifted::new(a, shift);
    match lambda_min(&op, 1e-8) {
        Ok(lo) => (-lo + 1e-8).clamp(0.0, cap),
        Err(_) => cap,
    }
}
