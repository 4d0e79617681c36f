//! Randomised invariants checked against independent oracles.

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{brute_opt, dense_lambda_max, naive_reduce, random_hermitian, to_operator};
use liftsdp::ball::truncated_adjacency;
use liftsdp::builtins::{bipartite3, k23, p_regular};
use liftsdp::dsl::{parse_poly, serialize_poly};
use liftsdp::lift::{evaluate, find_bad_vertices, sample_lift};
use liftsdp::pasting::{build_phi, restrict};
use liftsdp::sdp::repair::repair_bound;
use liftsdp::sdp::{reduce_rank, refine_dual, repair_feasibility, sdp_primal, Factor, GramSolution, Partition, SolverParams};
use liftsdp::word::{reduce, word_adjoint, Letter, Signature, Word};

fn word_strategy(sig: Signature, max_len: usize) -> impl Strategy<Value = Word> {
    let size = sig.alphabet_size();
    prop::collection::vec(0..size, 0..max_len)
        .prop_map(move |codes| Word::from_letters(codes.into_iter().map(|c| Letter::from_code(sig, c)).collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn reduction_is_confluent_and_idempotent(w in word_strategy(Signature::new(3, 2), 40)) {
        let r = reduce(&w);
        prop_assert_eq!(&r, &naive_reduce(&w));
        prop_assert_eq!(&reduce(&r), &r);
        prop_assert!(r.is_reduced());
    }

    #[test]
    fn adjoint_is_an_involution(w in word_strategy(Signature::new(1, 3), 30), u in word_strategy(Signature::new(1, 3), 30)) {
        prop_assert_eq!(&word_adjoint(&word_adjoint(&w)), &w);
        // (wu)* = u* w*
        let wu = reduce(&w).mul(&reduce(&u));
        prop_assert_eq!(word_adjoint(&wu), reduce(&word_adjoint(&u)).mul(&reduce(&word_adjoint(&w))));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sandwich_holds(seed in any::<u64>(), n in 2usize..9, real in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_hermitian(n, real, &mut rng);
        let op = to_operator(&a);
        let params = SolverParams::default();
        let primal = sdp_primal(&op, &params).unwrap();
        let dual = refine_dual(&op, Partition::Rows, Some(&primal), &params).unwrap();
        let tol = 1e-7;
        prop_assert!(brute_opt(&a) <= primal.objective + tol);
        prop_assert!(primal.objective <= dual.value + tol);
        prop_assert!(dual.value <= dense_lambda_max(&a) + tol);
        prop_assert!(primal.max_residual() < 1e-12);
    }

    #[test]
    fn repair_stays_within_bound(seed in any::<u64>(), r in 1usize..5, blocks in 1usize..5, log_eta in -9.0f64..-2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = r * blocks;
        let a = to_operator(&random_hermitian(n, false, &mut rng));
        let partition = Partition::Colors(r);
        let mut v = Factor::random(n, 3, &mut rng);
        v.normalize_classes(partition);
        let eta = 10f64.powf(log_eta);
        for i in 0..n {
            let s = (1.0 + eta * r as f64 * if (i % r) % 2 == 0 { 0.9 } else { -0.7 }).sqrt();
            v.row_mut(i).iter_mut().for_each(|z| *z *= s);
        }
        let noisy = GramSolution::from_factor(&a, v, partition);
        let fixed = repair_feasibility(&noisy, &a, eta).unwrap();
        prop_assert!(fixed.max_residual() <= 1e-12);
        prop_assert!((fixed.objective - noisy.objective).abs() <= repair_bound(a.max_abs_row_sum(), r, eta));
        prop_assert!(fixed.k() <= noisy.k() + r);
    }

    #[test]
    fn rank_reduction_keeps_feasibility_and_objective(seed in any::<u64>(), r in 1usize..6, blocks in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = r * blocks;
        let a = to_operator(&random_hermitian(n, true, &mut rng));
        let partition = Partition::Colors(r);
        let mut v = Factor::random(n, n, &mut rng);
        v.normalize_classes(partition);
        let sol = GramSolution::from_factor(&a, v, partition);
        let out = reduce_rank(&sol, &a).unwrap();
        prop_assert!(out.rank() <= r);
        prop_assert!(out.objective >= sol.objective - 1e-9);
        prop_assert!(out.max_residual() <= 1e-12);
    }
}

#[test]
fn dsl_round_trip_of_builtins() {
    for p in [p_regular(3), bipartite3(), k23()] {
        let q = parse_poly(&serialize_poly(&p)).unwrap();
        assert!(p.approx_eq(&q, 0.0));
    }
}

/// At a good vertex the pulled-back lift matrix is exactly the ball matrix.
#[test]
fn pasting_identity_on_good_vertices() {
    for (p, f0, n) in [(p_regular(3), 3, 4000), (k23(), 2, 3000)] {
        let af = truncated_adjacency(&p, f0, 10_000).unwrap();
        let dense_f = af.matrix.to_dense();
        let lift = sample_lift(p.signature(), n, 5).unwrap();
        let a_n = evaluate(&p, &lift).unwrap();
        let bad = find_bad_vertices(&lift, 2 * f0 + p.degree());
        let mask = bad.mask();
        let good: Vec<usize> = (0..n).filter(|&i| !mask[i]).take(50).collect();
        assert_eq!(good.len(), 50);
        for i in good {
            let phi = build_phi(&lift, &af.ball, i);
            assert!(phi.distinct);
            let local = restrict(&a_n, &phi, p.r());
            let err = (&local - &dense_f).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err < 1e-12, "vertex {i}: {err}");
        }
    }
}
