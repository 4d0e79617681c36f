//! Experiment orchestration: per-lift bounds, per-radius ball bounds and the
//! bracket on the infinite-lift value.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::{ball_size, truncated_adjacency, DEFAULT_BALL_CAP};
use crate::builtins::load_poly;
use crate::error::{Error, Result};
use crate::lift::{evaluate, sample_lift, LiftInstance};
use crate::operator::SparseHermitianOperator;
use crate::pasting::{certify_lower_bound, MAX_PASTE_ENTRIES};
use crate::poly::MatrixPolynomial;
use crate::sdp::{part_sdp_dual, part_sdp_primal, refine_dual, sdp_primal, Partition, SolverParams, ValueBracket};
use crate::spectral::{full_spectrum, hausdorff, lambda_max};

/// Bumped whenever the report layout changes.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Default dimension up to which spectra are computed densely.
pub const DEFAULT_DENSE_CUTOFF: usize = 4000;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// `builtin:<name>` or a path to a DSL file.
    pub poly: String,
    pub ns: Vec<usize>,
    pub seeds: Vec<u64>,
    pub f0s: Vec<usize>,
    /// Work with `−A` (cut-style objectives).
    pub negate: bool,
    pub solver: SolverParams,
    /// Pasting radius for the certified lower bound; skipped when absent.
    pub paste_f0: Option<usize>,
    pub eig_tol: f64,
}

impl ExperimentConfig {
    pub fn new(poly: &str, ns: Vec<usize>, seeds: Vec<u64>, f0s: Vec<usize>) -> Self {
        Self {
            poly: poly.to_string(),
            ns,
            seeds,
            f0s,
            negate: false,
            solver: SolverParams::default(),
            paste_f0: None,
            eig_tol: 1e-9,
        }
    }

    /// Loads the polynomial and checks every parameter against it.
    pub fn validate(&self) -> Result<MatrixPolynomial> {
        if self.seeds.is_empty() {
            return Err(Error::Validation("seeds list is empty".into()));
        }
        if self.ns.is_empty() {
            return Err(Error::Validation("n list is empty".into()));
        }
        let s = &self.solver;
        if !(s.tol > 0.0 && s.eig_tol > 0.0 && s.gap_tol > 0.0 && self.eig_tol > 0.0) {
            return Err(Error::Validation("tolerances must be positive".into()));
        }
        if s.restarts == 0 || s.max_iters == 0 {
            return Err(Error::Validation("restarts and max_iters must be positive".into()));
        }
        let p = prepare(&self.poly, self.negate)?;
        let sig = p.signature();
        for &n in &self.ns {
            if n < 2 {
                return Err(Error::LiftTooSmall(n));
            }
            if sig.d > 0 && n % 2 == 1 {
                return Err(Error::OddLiftSize { n });
            }
        }
        for &f0 in self.f0s.iter().chain(&self.paste_f0) {
            check_ball(&p, f0)?;
        }
        if let Some(f0) = self.paste_f0 {
            let nmax = *self.ns.iter().max().unwrap() as u128;
            let needed = nmax * ball_size(sig, f0);
            if needed > MAX_PASTE_ENTRIES {
                return Err(Error::ResourceCap { what: "pasting table", needed, cap: MAX_PASTE_ENTRIES });
            }
        }
        Ok(p)
    }
}

fn prepare(source: &str, negate: bool) -> Result<MatrixPolynomial> {
    let p = load_poly(source)?;
    p.check_self_adjoint()?;
    Ok(if negate { p.negated() } else { p })
}

fn check_ball(p: &MatrixPolynomial, f0: usize) -> Result<()> {
    let needed = ball_size(p.signature(), f0);
    if needed > DEFAULT_BALL_CAP as u128 {
        return Err(Error::ResourceCap { what: "ball", needed, cap: DEFAULT_BALL_CAP as u128 });
    }
    Ok(())
}

/// An error attached to one pipeline stage of one record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageError {
    pub stage: String,
    pub kind: String,
    pub message: String,
}

impl StageError {
    fn new(stage: &str, e: &Error) -> Self {
        let kind = match e {
            Error::NonConvergence { .. } => "non_convergence",
            Error::ResourceCap { .. } | Error::DimensionOverCutoff { .. } | Error::TooLarge { .. } => "resource",
            _ => "other",
        };
        Self { stage: stage.to_string(), kind: kind.to_string(), message: e.to_string() }
    }
}

/// Bounds on one sampled lift.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftResult {
    pub n: usize,
    pub seed: u64,
    pub eig: Option<f64>,
    pub sdp_primal: Option<f64>,
    pub sdp_dual: Option<f64>,
    pub pasted_lower: Option<f64>,
    pub bad_fraction: Option<f64>,
    pub errors: Vec<StageError>,
}

/// Bounds on one truncated ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallResult {
    pub f0: usize,
    pub vertices: usize,
    pub dim: usize,
    pub lambda_max: Option<f64>,
    pub part_primal: Option<f64>,
    pub part_dual: Option<f64>,
    pub errors: Vec<StageError>,
}

/// Spread of `Sdp(A_n)` over seeds at one `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Concentration {
    pub n: usize,
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Every value lies in the bracket widened by the dual gap tolerance.
    pub within_bracket: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_s: f64,
    pub lifts_s: Vec<f64>,
    pub balls_s: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub crate_version: String,
    pub config: ExperimentConfig,
    pub r: usize,
    pub signature: [usize; 2],
    pub lifts: Vec<LiftResult>,
    pub balls: Vec<BallResult>,
    pub bracket: Option<ValueBracket>,
    pub concentration: Vec<Concentration>,
    /// Wall-clock times; the only fields that differ between identical runs.
    pub timing: Timing,
}

impl ExperimentReport {
    /// True when some stage failed to converge.
    pub fn has_non_convergence(&self) -> bool {
        self.lifts
            .iter()
            .flat_map(|l| &l.errors)
            .chain(self.balls.iter().flat_map(|b| &b.errors))
            .any(|e| e.kind == "non_convergence")
    }
}

/// Bracket on the infinite-lift value plus the ball sequence behind it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SStarEstimate {
    pub bracket: ValueBracket,
    pub balls: Vec<BallResult>,
    /// Partitioned dual at the largest radius reached.
    pub finite_dual: f64,
    /// Difference of the last two duals.
    pub last_increment: f64,
    pub monotone: bool,
    pub stopped_early: bool,
}

fn solve_ball(p: &MatrixPolynomial, f0: usize, params: &SolverParams, eig_tol: f64) -> BallResult {
    let mut out = BallResult {
        f0,
        vertices: 0,
        dim: 0,
        lambda_max: None,
        part_primal: None,
        part_dual: None,
        errors: vec![],
    };
    let af = match truncated_adjacency(p, f0, DEFAULT_BALL_CAP) {
        Ok(af) => af,
        Err(e) => {
            out.errors.push(StageError::new("ball", &e));
            return out;
        }
    };
    out.vertices = af.ball.len();
    out.dim = af.dim();
    match lambda_max(&af.matrix, eig_tol) {
        Ok(v) => out.lambda_max = Some(v),
        Err(e) => out.errors.push(StageError::new("eig", &e)),
    }
    match part_sdp_primal(&af, params) {
        Ok(sol) => {
            out.part_primal = Some(sol.objective);
            match part_sdp_dual(&af, Some(&sol), params) {
                Ok(d) => out.part_dual = Some(d.value),
                Err(e) => out.errors.push(StageError::new("part_dual", &e)),
            }
        }
        Err(e) => out.errors.push(StageError::new("part_primal", &e)),
    }
    out
}

/// `lower` is the best partitioned primal, `upper` the last dual extended by
/// the tail of a `c / f0²` fit through the last two duals.
fn bracket_from(balls: &[BallResult]) -> Option<(ValueBracket, f64, f64, bool)> {
    let lower = balls.iter().filter_map(|b| b.part_primal).fold(f64::NEG_INFINITY, f64::max);
    let duals: Vec<(usize, f64)> = balls.iter().filter_map(|b| b.part_dual.map(|d| (b.f0, d))).collect();
    let &(f_last, d_last) = duals.last()?;
    if !lower.is_finite() {
        return None;
    }
    let monotone = duals.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-9);
    let (inc, upper) = match duals.len() {
        1 => (0.0, d_last),
        k => {
            let (f_prev, d_prev) = duals[k - 2];
            let inc = (d_last - d_prev).max(0.0);
            let steps = (f_last - f_prev).max(1) as f64;
            (inc, d_last + inc * (f_last as f64 + 2.0) / (2.0 * steps))
        }
    };
    let bracket = ValueBracket::new(
        lower,
        upper.max(lower),
        "max partitioned primal over balls",
        "last partitioned dual plus extrapolated tail (heuristic)",
    );
    Some((bracket, d_last, inc, monotone))
}

/// Solves balls of radius `0..=f0_max` and stops once the bracket is within `tol`.
pub fn estimate_s_star(p: &MatrixPolynomial, f0_max: usize, tol: f64, params: &SolverParams) -> Result<SStarEstimate> {
    check_ball(p, f0_max)?;
    let mut balls = Vec::new();
    let mut stopped_early = false;
    for f0 in 0..=f0_max {
        let b = solve_ball(p, f0, params, params.eig_tol);
        if let Some(e) = b.errors.iter().find(|e| e.stage != "eig") {
            return Err(Error::Validation(format!("ball f0={f0}: {}", e.message)));
        }
        balls.push(b);
        if f0 >= 1 && f0 < f0_max {
            if let Some((br, ..)) = bracket_from(&balls) {
                if br.gap <= tol {
                    stopped_early = true;
                    break;
                }
            }
        }
    }
    let (bracket, finite_dual, last_increment, monotone) =
        bracket_from(&balls).ok_or(Error::EmptyInput("no ball produced a bound"))?;
    Ok(SStarEstimate { bracket, balls, finite_dual, last_increment, monotone, stopped_early })
}

fn run_lift(p: &MatrixPolynomial, n: usize, seed: u64, config: &ExperimentConfig) -> LiftResult {
    let mut out = LiftResult {
        n,
        seed,
        eig: None,
        sdp_primal: None,
        sdp_dual: None,
        pasted_lower: None,
        bad_fraction: None,
        errors: vec![],
    };
    let a = match sample_lift(p.signature(), n, seed).and_then(|l| evaluate(p, &l)) {
        Ok(a) => a,
        Err(e) => {
            out.errors.push(StageError::new("lift", &e));
            return out;
        }
    };
    match lambda_max(&a, config.eig_tol) {
        Ok(v) => out.eig = Some(v),
        Err(e) => out.errors.push(StageError::new("eig", &e)),
    }
    match sdp_primal(&a, &config.solver) {
        Ok(sol) => {
            out.sdp_primal = Some(sol.objective);
            match refine_dual(&a, Partition::Rows, Some(&sol), &config.solver) {
                Ok(d) => out.sdp_dual = Some(d.value),
                Err(e) => out.errors.push(StageError::new("sdp_dual", &e)),
            }
        }
        Err(e) => out.errors.push(StageError::new("sdp_primal", &e)),
    }
    if let Some(f0) = config.paste_f0 {
        match certify_lower_bound(p, n, seed, f0, &config.solver, false) {
            Ok(rep) => {
                out.pasted_lower = Some(rep.sigma_prime_objective);
                out.bad_fraction = Some(rep.bad_fraction);
            }
            Err(e) => out.errors.push(StageError::new("paste", &e)),
        }
    }
    out
}

fn concentration(lifts: &[LiftResult], ns: &[usize], bracket: Option<&ValueBracket>, slack: f64) -> Vec<Concentration> {
    let mut seen = Vec::new();
    for &n in ns {
        if seen.contains(&n) {
            continue;
        }
        seen.push(n);
    }
    seen.into_iter()
        .filter_map(|n| {
            let vals: Vec<f64> = lifts.iter().filter(|l| l.n == n).filter_map(|l| l.sdp_primal).collect();
            if vals.is_empty() {
                return None;
            }
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            Some(Concentration {
                n,
                count: vals.len(),
                mean,
                min: vals.iter().copied().fold(f64::INFINITY, f64::min),
                max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                within_bracket: bracket.map(|b| vals.iter().all(|&v| b.contains(v, slack))),
            })
        })
        .collect()
}

/// Validates, then runs every `(n, seed)` record and every ball in parallel.
/// Failures are recorded per stage and do not abort the run.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let p = config.validate()?;
    let jobs: Vec<(usize, u64)> = config.ns.iter().flat_map(|&n| config.seeds.iter().map(move |&s| (n, s))).collect();
    let lifts: Vec<(LiftResult, f64)> = jobs
        .par_iter()
        .map(|&(n, seed)| {
            let t = Instant::now();
            let rec = run_lift(&p, n, seed, config);
            log::info!("lift n={n} seed={seed} done in {:.1}s", t.elapsed().as_secs_f64());
            (rec, t.elapsed().as_secs_f64())
        })
        .collect();
    let balls: Vec<(BallResult, f64)> = config
        .f0s
        .par_iter()
        .map(|&f0| {
            let t = Instant::now();
            let rec = solve_ball(&p, f0, &config.solver, config.eig_tol);
            (rec, t.elapsed().as_secs_f64())
        })
        .collect();
    let (lifts, lifts_s): (Vec<_>, Vec<_>) = lifts.into_iter().unzip();
    let (balls, balls_s): (Vec<_>, Vec<_>) = balls.into_iter().unzip();
    let mut sorted = balls.clone();
    sorted.sort_by_key(|b| b.f0);
    let bracket = bracket_from(&sorted).map(|b| b.0);
    let concentration = concentration(&lifts, &config.ns, bracket.as_ref(), config.solver.gap_tol);
    let sig = p.signature();
    Ok(ExperimentReport {
        schema_version: REPORT_SCHEMA_VERSION,
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        r: p.r(),
        signature: [sig.d, sig.e],
        lifts,
        balls,
        bracket,
        concentration,
        timing: Timing { total_s: start.elapsed().as_secs_f64(), lifts_s, balls_s },
    })
}

/// Spectra of a lift and of a ball, and how far apart they are.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectraComparison {
    pub hausdorff: f64,
    pub lambda_max_lift: f64,
    pub lambda_max_ball: f64,
    pub lambda_max_diff: f64,
    pub lift_spectrum: Vec<f64>,
    pub ball_spectrum: Vec<f64>,
}

/// Compares two operators by their full spectra.
pub fn compare_operators(
    a: &SparseHermitianOperator,
    b: &SparseHermitianOperator,
    cutoff: usize,
) -> Result<SpectraComparison> {
    let sa = full_spectrum(a, cutoff)?;
    let sb = full_spectrum(b, cutoff)?;
    let la = *sa.last().unwrap();
    let lb = *sb.last().unwrap();
    Ok(SpectraComparison {
        hausdorff: hausdorff(&sa, &sb)?,
        lambda_max_lift: la,
        lambda_max_ball: lb,
        lambda_max_diff: (la - lb).abs(),
        lift_spectrum: sa,
        ball_spectrum: sb,
    })
}

/// Spectrum of `A_n` on `lift` against that of the radius-`f0` ball. The ball
/// is a truncation, so this is evidence about the infinite lift, not a bound.
pub fn compare_spectra(p: &MatrixPolynomial, lift: &LiftInstance, f0: usize, cutoff: usize) -> Result<SpectraComparison> {
    let dim = lift.n * p.r();
    if dim > cutoff {
        return Err(Error::DimensionOverCutoff { dim, cutoff });
    }
    let a = evaluate(p, lift)?;
    let af = truncated_adjacency(p, f0, DEFAULT_BALL_CAP)?;
    compare_operators(&a, &af.matrix, cutoff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::scalar;

    #[test]
    fn empty_seeds_rejected() {
        let c = ExperimentConfig::new("builtin:p3", vec![10], vec![], vec![1]);
        assert!(matches!(c.validate(), Err(Error::Validation(_))));
        let c = ExperimentConfig::new("builtin:p3", vec![11], vec![0], vec![1]);
        assert!(matches!(c.validate(), Err(Error::OddLiftSize { n: 11 })));
        let c = ExperimentConfig::new("builtin:p3", vec![10], vec![0], vec![40]);
        assert!(matches!(c.validate(), Err(Error::ResourceCap { .. })));
    }

    #[test]
    fn scalar_bracket_collapses() {
        let est = estimate_s_star(&scalar(0.7), 5, 1e-9, &SolverParams::default()).unwrap();
        assert!((est.bracket.lower - 0.7).abs() < 1e-9);
        assert!((est.bracket.upper - 0.7).abs() < 1e-9);
        assert!(est.stopped_early);
    }
}
