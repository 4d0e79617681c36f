//! Lower bounds on `Sdp(A_n)` by pasting a ball solution into a lift.
//!
//! For each base vertex `i` the map `Φ_i = Σ_{v∈F} L^v |i⟩⟨v|` transplants the
//! ball onto the lift. With `ρ_F = V V*`, the average `σ = avg_i Φ̃_i ρ_F Φ̃_iᵀ`
//! factors as `G G*` with `G = [Φ̃_1 V, …, Φ̃_n V] / √n`, so `σ` is never formed:
//! only the `n · |F|` targets `L^v |i⟩` are stored.

use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::{truncated_adjacency, BallTruncation, DEFAULT_BALL_CAP};
use crate::error::{Error, Result};
use crate::lift::{evaluate, find_bad_vertices, sample_lift, BadVertexSet, LiftInstance};
use crate::operator::{HermitianOp, Negated, SparseHermitianOperator};
use crate::poly::MatrixPolynomial;
use crate::sdp::{part_sdp_primal, reduce_rank, sdp_primal, Factor, GramSolution, SolverParams};
use crate::spectral::{lambda_max_pair, LanczosOptions};

type C = Complex64;
const ZERO: C = C::new(0.0, 0.0);

/// Largest `n · |F|` accepted by [`build_sigma`].
pub const MAX_PASTE_ENTRIES: u128 = 40_000_000;

/// Vertices processed per parallel work item; partial sums are merged in chunk order.
const CHUNK: usize = 256;

/// `Φ_i` as the list of `(L^v |i⟩, sign)` over the ball words `v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PastingMap {
    pub base: usize,
    pub columns: Vec<(usize, i8)>,
    /// Whether the targets are pairwise distinct, i.e. the columns are orthonormal.
    pub distinct: bool,
}

pub fn build_phi(lift: &LiftInstance, ball: &BallTruncation, i: usize) -> PastingMap {
    let columns: Vec<(usize, i8)> = ball.vertices().iter().map(|w| lift.apply_word(w, i)).collect();
    let mut seen: Vec<usize> = columns.iter().map(|c| c.0).collect();
    seen.sort_unstable();
    let distinct = seen.windows(2).all(|w| w[0] != w[1]);
    PastingMap { base: i, columns, distinct }
}

/// `Φ̃_iᵀ Ã_n Φ̃_i`, an `|F| r × |F| r` matrix.
pub fn restrict(a_n: &SparseHermitianOperator, phi: &PastingMap, r: usize) -> DMatrix<C> {
    let f = phi.columns.len();
    let mut m = DMatrix::zeros(f * r, f * r);
    for (u, &(tu, su)) in phi.columns.iter().enumerate() {
        for (v, &(tv, sv)) in phi.columns.iter().enumerate() {
            let s = f64::from(su * sv);
            for c in 0..r {
                for d in 0..r {
                    m[(u * r + c, v * r + d)] = a_n.entry(tu * r + c, tv * r + d) * s;
                }
            }
        }
    }
    m
}

/// `S G G* S + diag(extra)` on the `n r`-dimensional lift space.
#[derive(Clone, Debug)]
pub struct PastedSolution {
    pub n: usize,
    pub r: usize,
    blocks: Arc<Blocks>,
    row_scale: Option<Vec<f64>>,
    extra_diag: Vec<(usize, f64)>,
    /// `⟨σ, A_n⟩`.
    pub objective: f64,
    pub diagonal: Vec<f64>,
    /// `max |σ_rr − 1/(n r)|`.
    pub diag_residual: f64,
    pub trace: f64,
    pub feasible: bool,
}

/// The blocks `Φ̃_i V`, either stored or rebuilt from the target table.
#[derive(Debug)]
struct Blocks {
    r: usize,
    ball_len: usize,
    /// Row-major `n × |F|` table of `(L^v |i⟩, sign)`.
    targets: Vec<(u32, i8)>,
    /// Ball factor `V`, `|F| r × k`.
    factor: Factor,
    cache: Option<Vec<LocalBlock>>,
}

/// One base vertex's block, rows merged by target vertex.
#[derive(Debug)]
struct LocalBlock {
    vertices: Vec<usize>,
    /// `vertices.len() · r` rows of length `k`, row-major.
    rows: Vec<C>,
}

/// Largest `n · |F| · r · k` for which the blocks are kept in memory.
const MAX_CACHED: usize = 20_000_000;

impl Blocks {
    fn k(&self) -> usize {
        self.factor.k
    }

    fn build(&self, i: usize, pos: &mut [u32]) -> LocalBlock {
        let (r, k) = (self.r, self.k());
        let mut vertices = Vec::new();
        let mut rows: Vec<C> = Vec::new();
        let span = &self.targets[i * self.ball_len..(i + 1) * self.ball_len];
        for (v, &(t, s)) in span.iter().enumerate() {
            let t = t as usize;
            let slot = if pos[t] == 0 {
                vertices.push(t);
                rows.extend(std::iter::repeat(ZERO).take(r * k));
                pos[t] = vertices.len() as u32;
                vertices.len() - 1
            } else {
                pos[t] as usize - 1
            };
            let s = f64::from(s);
            for c in 0..r {
                let src = self.factor.row(v * r + c);
                let dst = &mut rows[(slot * r + c) * k..(slot * r + c + 1) * k];
                for (d, x) in dst.iter_mut().zip(src) {
                    *d += x * s;
                }
            }
        }
        for &t in &vertices {
            pos[t] = 0;
        }
        LocalBlock { vertices, rows }
    }

    /// Calls `f` with block `i`; `pos[t]` is the slot of vertex `t` plus one
    /// while `f` runs, and zero again afterwards.
    fn with_block<R>(&self, i: usize, pos: &mut [u32], f: impl FnOnce(&LocalBlock, &[u32]) -> R) -> R {
        let owned;
        let b = match &self.cache {
            Some(c) => &c[i],
            None => {
                owned = self.build(i, pos);
                &owned
            }
        };
        for (slot, &t) in b.vertices.iter().enumerate() {
            pos[t] = slot as u32 + 1;
        }
        let out = f(b, pos);
        for &t in &b.vertices {
            pos[t] = 0;
        }
        out
    }
}

impl PastedSolution {
    fn k(&self) -> usize {
        self.blocks.k()
    }

    #[inline]
    fn scale(&self, row: usize) -> f64 {
        self.row_scale.as_ref().map_or(1.0, |s| s[row])
    }

    /// Objective, diagonal and trace from the current representation.
    fn measure(&mut self, a_n: &SparseHermitianOperator) {
        let (n, r, k) = (self.n, self.r, self.k());
        let dim = n * r;
        let this = &*self;
        let partials: Vec<(f64, Vec<(usize, f64)>)> = (0..n)
            .collect::<Vec<_>>()
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut pos = vec![0u32; n];
                let mut obj = 0.0;
                let mut diag = Vec::new();
                for &i in chunk {
                    this.blocks.with_block(i, &mut pos, |b, pos| {
                        for (slot, &t) in b.vertices.iter().enumerate() {
                            for c in 0..r {
                                let ra = t * r + c;
                                let sa = this.scale(ra);
                                if sa == 0.0 {
                                    continue;
                                }
                                let xa = &b.rows[(slot * r + c) * k..(slot * r + c + 1) * k];
                                diag.push((ra, sa * sa * xa.iter().map(|z| z.norm_sqr()).sum::<f64>()));
                                for (col, val) in a_n.row(ra) {
                                    let p = pos[col / r];
                                    if p == 0 {
                                        continue;
                                    }
                                    let sb = this.scale(col);
                                    if sb == 0.0 {
                                        continue;
                                    }
                                    let row_b = (p as usize - 1) * r + col % r;
                                    let xb = &b.rows[row_b * k..(row_b + 1) * k];
                                    let dot: C = xa.iter().zip(xb).map(|(x, y)| x.conj() * y).sum();
                                    obj += (val * dot).re * sa * sb;
                                }
                            }
                        }
                    });
                }
                (obj, diag)
            })
            .collect();
        let inv_n = 1.0 / n as f64;
        let mut obj = 0.0;
        let mut diagonal = vec![0.0; dim];
        for (o, d) in partials {
            obj += o;
            for (row, x) in d {
                diagonal[row] += x;
            }
        }
        obj *= inv_n;
        diagonal.iter_mut().for_each(|x| *x *= inv_n);
        for &(row, x) in &self.extra_diag {
            diagonal[row] += x;
            obj += x * a_n.entry(row, row).re;
        }
        let target = 1.0 / dim as f64;
        self.diag_residual = diagonal.iter().map(|x| (x - target).abs()).fold(0.0, f64::max);
        self.trace = diagonal.iter().sum();
        self.objective = obj;
        self.diagonal = diagonal;
    }

    /// `1 − tr(σ̂ Π_B̄)` with `σ̂ = σ / tr σ`.
    pub fn bad_mass(&self, bad: &BadVertexSet) -> f64 {
        let mask = bad.mask();
        let bad_trace: f64 = (0..self.n)
            .filter(|&j| mask[j])
            .map(|j| (0..self.r).map(|c| self.diagonal[j * self.r + c]).sum::<f64>())
            .sum();
        (bad_trace / self.trace).clamp(0.0, 1.0)
    }
}

impl HermitianOp for PastedSolution {
    fn dim(&self) -> usize {
        self.n * self.r
    }

    fn apply(&self, x: &[C], y: &mut [C]) {
        let (n, r, k) = (self.n, self.r, self.k());
        // c_i = (S Φ̃_i V)* x, then scatter S Φ̃_i V c_i
        let chunks: Vec<Vec<(usize, C)>> = (0..n)
            .collect::<Vec<_>>()
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut pos = vec![0u32; n];
                let mut out = Vec::new();
                let mut coef = vec![ZERO; k];
                for &i in chunk {
                    self.blocks.with_block(i, &mut pos, |b, _| {
                        coef.iter_mut().for_each(|z| *z = ZERO);
                        for (slot, &t) in b.vertices.iter().enumerate() {
                            for c in 0..r {
                                let row = t * r + c;
                                let xv = x[row] * self.scale(row);
                                let xa = &b.rows[(slot * r + c) * k..(slot * r + c + 1) * k];
                                for (cf, z) in coef.iter_mut().zip(xa) {
                                    *cf += z.conj() * xv;
                                }
                            }
                        }
                        for (slot, &t) in b.vertices.iter().enumerate() {
                            for c in 0..r {
                                let row = t * r + c;
                                let xa = &b.rows[(slot * r + c) * k..(slot * r + c + 1) * k];
                                let v: C = xa.iter().zip(&coef).map(|(p, q)| p * q).sum();
                                out.push((row, v * self.scale(row)));
                            }
                        }
                    });
                }
                out
            })
            .collect();
        y.iter_mut().for_each(|z| *z = ZERO);
        let inv_n = 1.0 / n as f64;
        for part in chunks {
            for (row, v) in part {
                y[row] += v * inv_n;
            }
        }
        for &(row, d) in &self.extra_diag {
            y[row] += x[row] * d;
        }
    }
}

/// Pastes a ball solution into every vertex of the lift.
///
/// `bad` is only validated against the lift size; the average runs over all
/// `i ∈ [n]`, good or bad.
pub fn build_sigma(
    lift: &LiftInstance,
    a_n: &SparseHermitianOperator,
    rho_f: &GramSolution,
    ball: &BallTruncation,
    r: usize,
    bad: &BadVertexSet,
) -> Result<PastedSolution> {
    let n = lift.n;
    if bad.n != n {
        return Err(Error::Validation(format!("bad set is for n = {}, lift has n = {n}", bad.n)));
    }
    if rho_f.factor.rows != ball.len() * r {
        return Err(Error::Validation("ball solution does not match the ball".into()));
    }
    if a_n.dim() != n * r {
        return Err(Error::Validation("lift matrix does not match the lift".into()));
    }
    let needed = n as u128 * ball.len() as u128;
    if needed > MAX_PASTE_ENTRIES {
        return Err(Error::ResourceCap { what: "pasted targets n·|F|", needed, cap: MAX_PASTE_ENTRIES });
    }
    let targets: Vec<(u32, i8)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            ball.vertices().iter().map(move |w| {
                let (t, s) = lift.apply_word(w, i);
                (t as u32, s)
            })
        })
        .collect();
    let mut blocks = Blocks { r, ball_len: ball.len(), targets, factor: rho_f.factor.clone(), cache: None };
    if n * ball.len() * r * blocks.k() <= MAX_CACHED {
        let cache = (0..n)
            .collect::<Vec<_>>()
            .par_chunks(CHUNK)
            .flat_map_iter(|chunk| {
                let mut pos = vec![0u32; n];
                chunk.iter().map(|&i| blocks.build(i, &mut pos)).collect::<Vec<_>>()
            })
            .collect();
        blocks.cache = Some(cache);
    }
    let mut sol = PastedSolution {
        n,
        r,
        blocks: Arc::new(blocks),
        row_scale: None,
        extra_diag: Vec::new(),
        objective: 0.0,
        diagonal: Vec::new(),
        diag_residual: 0.0,
        trace: 0.0,
        feasible: false,
    };
    sol.measure(a_n);
    sol.feasible = sol.diag_residual <= 1e-12;
    Ok(sol)
}

/// `σ' = Π_B̄ σ Π_B̄ + (1/(n r)) Π_B`.
pub fn fix_sigma(sigma: &PastedSolution, a_n: &SparseHermitianOperator, bad: &BadVertexSet) -> PastedSolution {
    let (n, r) = (sigma.n, sigma.r);
    let mask = bad.mask();
    let mut scale = sigma.row_scale.clone().unwrap_or_else(|| vec![1.0; n * r]);
    let mut extra = Vec::new();
    let d = 1.0 / (n * r) as f64;
    for j in 0..n {
        if mask[j] {
            for c in 0..r {
                scale[j * r + c] = 0.0;
                extra.push((j * r + c, d));
            }
        }
    }
    let mut out = sigma.clone();
    out.row_scale = Some(scale);
    out.extra_diag = extra;
    out.measure(a_n);
    out.feasible = out.diag_residual <= 1e-12;
    out
}

/// `D^{-1/2} σ D^{-1/2}` with `D = n r · diag(σ)`; rows with zero diagonal get
/// `1/(n r)` added. Feasible for every lift, but carries no a-priori bound.
pub fn rescale_sigma(sigma: &PastedSolution, a_n: &SparseHermitianOperator) -> PastedSolution {
    let dim = sigma.n * sigma.r;
    let target = 1.0 / dim as f64;
    let base = sigma.row_scale.clone().unwrap_or_else(|| vec![1.0; dim]);
    let mut scale = base;
    let mut extra = Vec::new();
    let mut fixed = vec![false; dim];
    for &(row, _) in &sigma.extra_diag {
        fixed[row] = true;
    }
    for (row, &dv) in sigma.diagonal.iter().enumerate() {
        if fixed[row] {
            scale[row] = 0.0;
            extra.push((row, target));
        } else if dv > 1e-300 {
            scale[row] *= (target / dv).sqrt();
        } else {
            scale[row] = 0.0;
            extra.push((row, target));
        }
    }
    let mut out = sigma.clone();
    out.row_scale = Some(scale);
    out.extra_diag = extra;
    out.measure(a_n);
    out.feasible = out.diag_residual <= 1e-12;
    out
}

/// `‖Ã_n‖ · (tr σ · √(8λ) + |B|/n)` with `λ = 1 − tr(σ̂ Π_B̄)`.
pub fn gentle_bound(sigma: &PastedSolution, bad: &BadVertexSet, norm_a: f64) -> f64 {
    let lambda = sigma.bad_mass(bad);
    norm_a * (sigma.trace * (8.0 * lambda).sqrt() + bad.fraction())
}

/// Smallest eigenvalue of a pasted solution and its eigen-residual, by
/// Lanczos on `−σ`. The bottom of the spectrum is tightly clustered, so after
/// `max_restarts` the best Ritz value is returned with its residual.
pub fn min_eigenvalue(sigma: &PastedSolution, tol: f64, max_restarts: usize) -> Result<(f64, f64)> {
    let mut opts = LanczosOptions::with_tol(tol);
    opts.dense_threshold = 0;
    opts.max_restarts = max_restarts;
    opts.best_effort = true;
    let pair = lambda_max_pair(&Negated(sigma), &opts)?;
    Ok((-pair.value, pair.residual))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificationReport {
    pub n: usize,
    pub seed: u64,
    pub f0: usize,
    /// Cycle length used for the bad set, `2 f0 + deg p`.
    pub cycle_bound: usize,
    pub bad_fraction: f64,
    pub ball_objective: f64,
    pub sigma_objective: f64,
    pub sigma_prime_objective: f64,
    pub sigma_prime_diag_residual: f64,
    pub sigma_prime_min_eigenvalue: f64,
    pub sigma_prime_eig_residual: f64,
    pub gentle_bound: f64,
    pub measured_drop: f64,
    pub sigma_trace: f64,
    /// Objective of the diagonally rescaled `σ`, for comparison.
    pub rescaled_objective: f64,
    pub sdp_primal: Option<f64>,
    pub wall_time_s: f64,
}

/// Ball solution, rank reduction, lift, bad set, pasting, fixing.
/// `⟨σ', A_n⟩` is a certified lower bound on `Sdp(A_n)`.
pub fn certify_lower_bound(
    p: &MatrixPolynomial,
    n: usize,
    seed: u64,
    f0: usize,
    params: &SolverParams,
    with_sdp: bool,
) -> Result<CertificationReport> {
    let start = Instant::now();
    let af = truncated_adjacency(p, f0, DEFAULT_BALL_CAP)?;
    let rho = part_sdp_primal(&af, params)?;
    log::debug!("ball solution {:.10} after {:.1}s", rho.objective, start.elapsed().as_secs_f64());
    let rho = reduce_rank(&rho, &af.matrix)?;
    let lift = sample_lift(p.signature(), n, seed)?;
    let a_n = evaluate(p, &lift)?;
    let cycle_bound = 2 * f0 + p.degree();
    log::debug!("lift ready after {:.1}s", start.elapsed().as_secs_f64());
    let bad = find_bad_vertices(&lift, cycle_bound);
    log::debug!("bad fraction {:.4} after {:.1}s", bad.fraction(), start.elapsed().as_secs_f64());
    let sigma = build_sigma(&lift, &a_n, &rho, &af.ball, p.r(), &bad)?;
    let fixed = fix_sigma(&sigma, &a_n, &bad);
    let rescaled = rescale_sigma(&sigma, &a_n);
    let norm_a = p.operator_norm_bound().min(a_n.max_abs_row_sum());
    log::debug!("pasted and fixed after {:.1}s", start.elapsed().as_secs_f64());
    let (min_eig, eig_res) = min_eigenvalue(&fixed, 1e-10, 40)?;
    log::debug!("psd check done after {:.1}s", start.elapsed().as_secs_f64());
    let sdp = if with_sdp { Some(sdp_primal(&a_n, params)?.objective) } else { None };
    Ok(CertificationReport {
        n,
        seed,
        f0,
        cycle_bound,
        bad_fraction: bad.fraction(),
        ball_objective: rho.objective,
        sigma_objective: sigma.objective,
        sigma_prime_objective: fixed.objective,
        sigma_prime_diag_residual: fixed.diag_residual,
        sigma_prime_min_eigenvalue: min_eig,
        sigma_prime_eig_residual: eig_res,
        gentle_bound: gentle_bound(&sigma, &bad, norm_a),
        measured_drop: sigma.objective - fixed.objective,
        sigma_trace: sigma.trace,
        rescaled_objective: rescaled.objective,
        sdp_primal: sdp,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}
