mod common;

use cnls_core::config::{parse_config, to_config_string};
use cnls_core::continuation::{scaled_problem, scaling_seed, trace_branch};
use cnls_core::hypotheses::Variant;
use cnls_core::model::{Bump, CoefficientField, CoefficientSet, Grid, Nonlinearity, Problem};
use cnls_core::operator::residual;
use cnls_core::solver::{solve_ground_state, SolverConfig, Symmetry};
use cnls_core::Error;
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn branch_follows_the_exact_scaling_law() {
    let p = weakly_coupled(1501);
    let cfg = SolverConfig::default();
    let lambdas = [0.3, 0.7, 1.0, 1.9, 3.3];
    let points = trace_branch(&p, &lambdas, Variant::NonlinearScaled, &cfg).unwrap();
    let base = solve_ground_state(&p, &cfg).unwrap();
    for pt in &points {
        let sol = pt.solution.as_ref().unwrap();
        let expected = scaling_seed(&base.fixed_point, pt.lambda);
        let rel = sol.fixed_point.distance(&expected) / expected.norm();
        assert!(rel <= 1e-10, "lambda {}: {rel:e}", pt.lambda);
        let q = scaled_problem(&p, pt.lambda, Variant::NonlinearScaled);
        assert!(residual(&q, q.grid(), &sol.wave).sup <= 1e-6);
        assert!(pt.r_lambda <= sol.norm() && sol.norm() <= pt.big_r_lambda);
    }
}

#[test]
fn fully_scaled_branch_rejects_lambda_past_the_bound() {
    let p = weakly_coupled(801);
    let err = trace_branch(&p, &[1.0, 100.0], Variant::FullyScaled, &SolverConfig::default()).unwrap_err();
    assert!(matches!(err, Error::ParameterOutOfRange { .. }), "{err}");
    let pts = trace_branch(&p, &[0.5, 1.0], Variant::FullyScaled, &SolverConfig::default()).unwrap();
    assert!(pts.iter().all(|pt| pt.converged()));
}

#[test]
fn odd_branch_stays_odd() {
    let p = twin_problem(1501);
    let cfg = SolverConfig {
        symmetry: Symmetry::Odd,
        ..SolverConfig::default()
    };
    for pt in trace_branch(&p, &[0.5, 1.0, 2.0], Variant::NonlinearScaled, &cfg).unwrap() {
        let sol = pt.solution.unwrap();
        assert_eq!(sol.wave.oddness_defect(), 0.0);
    }
}

/// Positive fields for `a, d`; non-negative, compactly supported ones for
/// the couplings.
fn random_field(rng: &mut ChaCha8Rng, positive: bool) -> CoefficientField {
    if positive {
        return match rng.gen_range(0..2) {
            0 => constant(rng.gen_range(0.5..4.0)),
            _ => random_potential(rng, 4, 0.5, 4.0),
        };
    }
    match rng.gen_range(0..3) {
        0 => CoefficientField::zero(),
        1 => {
            let (lo, hi) = random_interval(rng, 3.0);
            bump(rng.gen_range(0.01..3.0), lo, hi)
        }
        _ => {
            let bumps = (0..rng.gen_range(1..4))
                .map(|i| {
                    let lo = -3.0 + 2.0 * i as f64 + rng.gen_range(0.0..0.5);
                    Bump {
                        value: rng.gen_range(0.01..3.0),
                        lo,
                        hi: lo + rng.gen_range(0.1..1.4),
                    }
                })
                .collect();
            CoefficientField::bumps(bumps).unwrap()
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn configuration_round_trips(seed in any::<u64>(), cells in 50usize..2000, half in 18.0f64..40.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let set = CoefficientSet {
            a: random_field(&mut rng, true),
            b: random_field(&mut rng, false),
            c: random_field(&mut rng, false),
            d: random_field(&mut rng, true),
            e: random_field(&mut rng, false),
            f: random_field(&mut rng, false),
        };
        let nl = if rng.gen_bool(0.5) { Nonlinearity::decoupled_cubic() } else { Nonlinearity::spinor_cubic() };
        let problem = Problem::new(set, nl, Grid::symmetric(half, 2 * cells + 1).unwrap()).unwrap();
        prop_assume!(problem.clone().validate_strict().is_ok());
        let cfg = SolverConfig {
            theta: rng.gen_range(0.05..=1.0),
            max_iter: rng.gen_range(1..5000),
            tol: rng.gen_range(1e-12..1e-4),
            residual_tol: rng.gen_range(1e-10..1e-3),
            ladder: rng.gen_range(1..20),
            newton_fallback: rng.gen_bool(0.5),
            symmetry: if rng.gen_bool(0.5) { Symmetry::Odd } else { Symmetry::None },
            override_hypotheses: false,
            stall_window: rng.gen_range(1..50),
        };
        let text = to_config_string(&problem, &cfg).unwrap();
        let back = parse_config(&text).unwrap();
        prop_assert_eq!(back.problem, problem);
        prop_assert_eq!(back.solver, cfg);
    }
}
