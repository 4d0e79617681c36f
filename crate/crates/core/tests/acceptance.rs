//! One test per acceptance criterion, each at its pinned tolerance. Every test
//! prints a `PASS`/`FAIL` line before asserting.

mod common;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{brute_opt, dense_lambda_max, ipm_sdp, naive_reduce, random_hermitian, to_operator, verdict};
use liftsdp::ball::{truncated_adjacency, DEFAULT_BALL_CAP};
use liftsdp::builtins::{k23, p333, p333_gauge, p_regular};
use liftsdp::experiment::estimate_s_star;
use liftsdp::lift::{evaluate, sample_lift};
use liftsdp::pasting::certify_lower_bound;
use liftsdp::sdp::repair::repair_bound;
use liftsdp::sdp::{
    part_sdp_dual, part_sdp_primal, reduce_rank, refine_dual, repair_feasibility, sdp_primal, Factor, GramSolution,
    Partition, SolverParams,
};
use liftsdp::spectral::lambda_max;
use liftsdp::word::{reduce, reduce_from_right, word_adjoint, Letter, Signature, Word};

fn all_words(sig: Signature, len: usize) -> Vec<Word> {
    let letters = sig.letters();
    let mut layer = vec![Vec::<Letter>::new()];
    let mut out = vec![Word::identity()];
    for _ in 0..len {
        let mut next = Vec::new();
        for w in &layer {
            for &l in &letters {
                let mut v = w.clone();
                v.push(l);
                out.push(Word::from_letters(v.clone()));
                next.push(v);
            }
        }
        layer = next;
    }
    out
}

fn word_laws(w: &Word) -> bool {
    let r = reduce(w);
    r.is_reduced()
        && reduce(&r) == r
        && reduce_from_right(w) == r
        && naive_reduce(w) == r
        && word_adjoint(&word_adjoint(w)) == *w
        && reduce(&word_adjoint(w)) == word_adjoint(&r)
}

#[test]
fn ac1_word_algebra() {
    let start = Instant::now();
    let sig = Signature::new(2, 2);
    let words = all_words(sig, 6);
    let exhaustive_bad = words.iter().filter(|w| !word_laws(w)).count();
    let letters = sig.letters();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut random_bad = 0;
    for _ in 0..10_000 {
        let len = rng.gen_range(7..60);
        let w = Word::from_letters((0..len).map(|_| letters[rng.gen_range(0..letters.len())]).collect());
        let u = Word::from_letters((0..rng.gen_range(0..20)).map(|_| letters[rng.gen_range(0..letters.len())]).collect());
        let assoc = reduce(&w).mul(&reduce(&u)) == reduce(&Word::from_letters([w.letters(), u.letters()].concat()));
        if !word_laws(&w) || !assoc {
            random_bad += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = exhaustive_bad == 0 && random_bad == 0 && secs < 10.0;
    verdict(
        "AC1 word algebra",
        pass,
        &format!("{} exhaustive words, {exhaustive_bad} bad; 10000 random, {random_bad} bad; {secs:.1}s", words.len()),
    );
    assert!(pass);
}

#[test]
fn ac2_sandwich_and_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let params = SolverParams::default();
    let mut worst_oracle: f64 = 0.0;
    let mut violations = Vec::new();
    for case in 0..100 {
        let n = rng.gen_range(2..=16);
        let a = random_hermitian(n, case % 2 == 0, &mut rng);
        let op = to_operator(&a);
        let opt = brute_opt(&a);
        let primal = sdp_primal(&op, &params).unwrap();
        let dual = refine_dual(&op, Partition::Rows, Some(&primal), &params).unwrap();
        let eig = dense_lambda_max(&a);
        let oracle = ipm_sdp(&a);
        let tol = 1e-7;
        if !(opt <= primal.objective + tol && primal.objective <= dual.value + tol && dual.value <= eig + tol) {
            violations.push(format!(
                "case {case} N={n}: opt {opt:.8} primal {:.8} dual {:.8} eig {eig:.8}",
                primal.objective, dual.value
            ));
        }
        worst_oracle = worst_oracle.max((primal.objective - oracle).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = violations.is_empty() && worst_oracle <= 1e-4 && secs < 300.0;
    verdict(
        "AC2 sandwich and oracle",
        pass,
        &format!("{} sandwich violations; max |primal - ipm| {worst_oracle:.2e}; {secs:.1}s", violations.len()),
    );
    assert!(pass, "{violations:?}");
}

#[test]
fn ac3_maxcut_concentration() {
    let start = Instant::now();
    let p = p_regular(3).negated();
    let target = 2.0 * 2f64.sqrt();
    let mut values = Vec::new();
    for seed in 0..5 {
        let lift = sample_lift(p.signature(), 2000, seed).unwrap();
        let a = evaluate(&p, &lift).unwrap();
        values.push(sdp_primal(&a, &SolverParams::default()).unwrap().objective);
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = values.iter().all(|v| (v - target).abs() <= 0.15) && secs < 600.0;
    verdict("AC3 max-cut concentration", pass, &format!("Sdp(-A_n) = {values:.4?}; {secs:.1}s"));
    assert!(pass);
}

#[test]
fn ac4_partitioned_duality() {
    let start = Instant::now();
    let params = SolverParams::default();
    let mut worst: f64 = 0.0;
    let mut cases = Vec::new();
    for (name, p) in [("p3", p_regular(3)), ("p333", p333()), ("p333-gauge", p333_gauge()), ("k23", k23())] {
        for f0 in 0.. {
            let af = truncated_adjacency(&p, f0, DEFAULT_BALL_CAP).unwrap();
            if af.dim() > 600 {
                break;
            }
            let primal = part_sdp_primal(&af, &params).unwrap();
            let dual = part_sdp_dual(&af, Some(&primal), &params).unwrap();
            let gap = (dual.value - primal.objective).abs();
            worst = worst.max(gap);
            cases.push(format!("{name}@{f0}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-3 && secs < 600.0;
    verdict(
        "AC4 partitioned duality",
        pass,
        &format!("{} balls ({}); max gap {worst:.2e}; {secs:.1}s", cases.len(), cases.join(" ")),
    );
    assert!(pass);
}

#[test]
fn ac5_strict_separation() {
    let start = Instant::now();
    let est = estimate_s_star(&k23(), 5, 1e-6, &SolverParams::default()).unwrap();
    let last = est.balls.last().unwrap();
    assert_eq!(last.f0, 5);
    let primal = last.part_primal.unwrap();
    let dual = last.part_dual.unwrap();
    let paper = (13.0f64 / 4.0 + 2.0 * 2f64.sqrt()).sqrt() - 0.1;
    let secs = start.elapsed().as_secs_f64();
    let pass = dual <= 2.394 && primal >= 2.30 && est.bracket.contains(paper, 0.05) && secs < 900.0;
    verdict(
        "AC5 strict SDP < Eig",
        pass,
        &format!(
            "f0=5 primal {primal:.6} dual {dual:.6}; bracket [{:.4}, {:.4}] vs {paper:.4}; {secs:.1}s",
            est.bracket.lower, est.bracket.upper
        ),
    );
    assert!(pass);
}

#[test]
fn ac6_p333_spectral_target() {
    let start = Instant::now();
    let p = p333();
    let mut values = Vec::new();
    let mut failure = None;
    for f0 in 0..=6 {
        match truncated_adjacency(&p, f0, DEFAULT_BALL_CAP) {
            Ok(af) => values.push(lambda_max(&af.matrix, 1e-9).unwrap()),
            Err(e) => {
                failure = Some(format!("f0={f0}: {e}"));
                break;
            }
        }
    }
    let monotone = values.windows(2).all(|w| w[1] > w[0]);
    let at6 = values.get(6).copied();
    let secs = start.elapsed().as_secs_f64();
    let pass = monotone && at6.is_some_and(|v| (v - 5.0).abs() <= 0.1) && secs < 300.0;
    verdict(
        "AC6 p333 spectral target",
        pass,
        &format!("lambda_max by f0 {values:.4?}; monotone {monotone}; {}; {secs:.1}s", failure.as_deref().unwrap_or("all radii built")),
    );
    assert!(pass);
}

#[test]
fn ac7_nae3sat_value() {
    let start = Instant::now();
    let est = estimate_s_star(&p333().negated(), 3, 1e-6, &SolverParams::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let pass = est.bracket.contains(1.5, 0.05) && secs < 600.0;
    verdict(
        "AC7 NAE-3SAT value",
        pass,
        &format!("bracket [{:.4}, {:.4}] for target 1.5; {secs:.1}s", est.bracket.lower, est.bracket.upper),
    );
    assert!(pass);
}

#[test]
fn ac8_pasting_certificate() {
    let start = Instant::now();
    let p = p_regular(3);
    let params = SolverParams::default();
    let af = truncated_adjacency(&p, 4, DEFAULT_BALL_CAP).unwrap();
    let ball = part_sdp_primal(&af, &params).unwrap().objective;
    let mut lines = Vec::new();
    let mut pass = true;
    for seed in 0..3 {
        let rep = certify_lower_bound(&p, 10_000, seed, 4, &params, false).unwrap();
        let ok_diag = rep.sigma_prime_diag_residual <= 1e-12;
        let ok_psd = rep.sigma_prime_min_eigenvalue >= -1e-8;
        let ok_obj = rep.sigma_prime_objective >= ball - 0.05;
        pass &= ok_diag && ok_psd && ok_obj;
        lines.push(format!(
            "seed {seed}: diag {:.1e} [{}] min eig {:.1e} [{}] objective {:.4} vs {:.4} [{}]",
            rep.sigma_prime_diag_residual,
            ok_diag,
            rep.sigma_prime_min_eigenvalue,
            ok_psd,
            rep.sigma_prime_objective,
            ball - 0.05,
            ok_obj
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 900.0;
    verdict("AC8 pasting certificate", pass, &format!("{}; {secs:.1}s", lines.join("; ")));
    assert!(pass);
}

fn random_feasible(rng: &mut ChaCha8Rng, r: usize) -> (liftsdp::operator::SparseHermitianOperator, GramSolution) {
    let blocks = rng.gen_range(1..6);
    let n = blocks * r;
    let a = to_operator(&random_hermitian(n, rng.gen_bool(0.5), rng));
    let partition = Partition::Colors(r);
    let mut v = Factor::random(n, rng.gen_range(1..n + 3), rng);
    v.normalize_classes(partition);
    let sol = GramSolution::from_factor(&a, v, partition);
    (a, sol)
}

#[test]
fn ac9_repair_and_rank() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut repair_bad = 0;
    let mut rank_bad = 0;
    for _ in 0..50 {
        let r = rng.gen_range(1..5);
        let (a, sol) = random_feasible(&mut rng, r);
        let eta = 10f64.powf(rng.gen_range(-8.0..-2.0));
        let mut noisy = sol.factor.clone();
        let scales: Vec<f64> = (0..r).map(|_| 1.0 + rng.gen_range(-1.0..1.0) * eta * r as f64).collect();
        for i in 0..noisy.rows {
            let s = scales[i % r].sqrt();
            noisy.row_mut(i).iter_mut().for_each(|z| *z *= s);
        }
        let noisy = GramSolution::from_factor(&a, noisy, sol.partition);
        let fixed = repair_feasibility(&noisy, &a, eta).unwrap();
        let bound = repair_bound(a.max_abs_row_sum(), r, eta);
        if fixed.max_residual() > 1e-12 || (fixed.objective - noisy.objective).abs() > bound {
            repair_bad += 1;
        }
    }
    for _ in 0..50 {
        let r = rng.gen_range(1..5);
        let (a, sol) = random_feasible(&mut rng, r);
        let out = reduce_rank(&sol, &a).unwrap();
        if out.rank() > r || out.objective < sol.objective - 1e-9 || out.max_residual() > 1e-12 {
            rank_bad += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = repair_bad == 0 && rank_bad == 0 && secs < 120.0;
    verdict(
        "AC9 repair and rank reduction",
        pass,
        &format!("repair violations {repair_bad}/50; rank violations {rank_bad}/50; {secs:.1}s"),
    );
    assert!(pass);
}
