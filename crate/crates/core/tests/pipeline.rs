//! End-to-end runs of the experiment layer.

use serde_json::Value;

use liftsdp::ball::truncated_adjacency;
use liftsdp::builtins::{k23, p_regular, scalar};
use liftsdp::experiment::{compare_operators, compare_spectra, estimate_s_star, run_experiment, ExperimentConfig};
use liftsdp::lift::{evaluate, sample_lift, sample_lift_unsigned};
use liftsdp::sdp::{refine_dual, sdp_primal, Partition, SolverParams};
use liftsdp::spectral::lambda_max;
use liftsdp::Error;

fn schema() -> jsonschema::JSONSchema {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/schema/report.schema.json")).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    jsonschema::JSONSchema::compile(&schema).unwrap()
}

fn strip_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing");
    v
}

#[test]
fn small_experiment_is_consistent_valid_and_deterministic() {
    let mut config = ExperimentConfig::new("builtin:p3", vec![60, 120], vec![0, 1, 2], vec![1, 2, 3]);
    config.negate = true;
    config.paste_f0 = Some(2);
    let report = run_experiment(&config).unwrap();
    assert_eq!(report.lifts.len(), 6);
    for rec in &report.lifts {
        assert!(rec.errors.is_empty(), "{:?}", rec.errors);
        let (primal, dual) = (rec.sdp_primal.unwrap(), rec.sdp_dual.unwrap());
        assert!(primal <= dual + config.solver.gap_tol, "{rec:?}");
        assert!(dual <= rec.eig.unwrap() + 1e-7);
        assert!(rec.pasted_lower.unwrap() <= primal + 1e-6);
    }
    for b in &report.balls {
        assert!(b.part_primal.unwrap() <= b.part_dual.unwrap() + config.solver.gap_tol);
    }
    assert_eq!(report.concentration.len(), 2);
    let json = serde_json::to_value(&report).unwrap();
    assert!(schema().is_valid(&json));
    let again = serde_json::to_value(run_experiment(&config).unwrap()).unwrap();
    assert_eq!(
        serde_json::to_string(&strip_timing(json)).unwrap(),
        serde_json::to_string(&strip_timing(again)).unwrap()
    );
}

#[test]
fn empty_seeds_is_a_validation_error() {
    let config = ExperimentConfig::new("builtin:p3", vec![100], vec![], vec![2]);
    assert!(matches!(run_experiment(&config), Err(Error::Validation(_))));
}

#[test]
fn estimate_validates_against_schema() {
    let est = estimate_s_star(&p_regular(3), 5, 1e-6, &SolverParams::default()).unwrap();
    assert!(est.monotone);
    assert!(schema().is_valid(&serde_json::to_value(&est).unwrap()));
}

#[test]
fn scalar_polynomial_bracket_is_its_constant() {
    let est = estimate_s_star(&scalar(-1.25), 4, 1e-9, &SolverParams::default()).unwrap();
    assert!((est.bracket.lower + 1.25).abs() < 1e-9 && (est.bracket.upper + 1.25).abs() < 1e-9);
}

#[test]
fn p3_bracket_contains_two_root_two() {
    let est = estimate_s_star(&p_regular(3), 8, 1e-6, &SolverParams::default()).unwrap();
    let target = 2.0 * 2f64.sqrt();
    assert!(est.bracket.contains(target, 0.0), "{:?}", est.bracket);
    // with r = 1 the partitioned SDP is the top eigenvalue of the ball
    let af = truncated_adjacency(&p_regular(3), 8, 1000).unwrap();
    assert!((est.bracket.lower - lambda_max(&af.matrix, 1e-10).unwrap()).abs() < 1e-6);
}

#[test]
fn p3_bracket_lower_at_least_2_78() {
    let est = estimate_s_star(&p_regular(3), 8, 1e-6, &SolverParams::default()).unwrap();
    assert!(est.bracket.lower >= 2.78, "lower {:.6}", est.bracket.lower);
}

#[test]
fn k23_sdp_below_eig() {
    let p = k23();
    let params = SolverParams { max_iters: 500, restarts: 1, dual_iters: 0, ..SolverParams::default() };
    for seed in 0..3 {
        let lift = sample_lift(p.signature(), 2000, seed).unwrap();
        let a = evaluate(&p, &lift).unwrap();
        let eig = lambda_max(&a, 1e-9).unwrap();
        let primal = sdp_primal(&a, &params).unwrap();
        let dual = refine_dual(&a, Partition::Rows, Some(&primal), &params).unwrap();
        assert!(primal.objective <= dual.value + 1e-9);
        assert!(dual.value <= eig - 0.02, "seed {seed}: dual {} eig {eig}", dual.value);
    }
}

#[test]
fn lift_and_ball_spectra_agree_at_the_top() {
    let p = p_regular(3);
    let lift = sample_lift(p.signature(), 400, 3).unwrap();
    let c = compare_spectra(&p, &lift, 7, 4000).unwrap();
    assert!(c.lambda_max_diff <= 0.15, "{}", c.lambda_max_diff);
    assert!(c.hausdorff.is_finite());
    assert!(matches!(compare_spectra(&p, &lift, 7, 300), Err(Error::DimensionOverCutoff { .. })));
}

#[test]
fn identical_matrices_have_distance_zero() {
    let af = truncated_adjacency(&k23(), 3, 1000).unwrap();
    let c = compare_operators(&af.matrix, &af.matrix, 4000).unwrap();
    assert_eq!(c.hausdorff, 0.0);
    assert_eq!(c.lambda_max_diff, 0.0);
}

#[test]
fn unsigned_lifts_show_the_trivial_eigenvalue() {
    let p = p_regular(3);
    let unsigned = evaluate(&p, &sample_lift_unsigned(p.signature(), 400, 8).unwrap()).unwrap();
    let signed = evaluate(&p, &sample_lift(p.signature(), 400, 8).unwrap()).unwrap();
    assert!((lambda_max(&unsigned, 1e-10).unwrap() - 3.0).abs() < 1e-8);
    assert!(lambda_max(&signed, 1e-10).unwrap() < 2.95);
}
