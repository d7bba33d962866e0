mod common;

use cnls_core::hypotheses::{annulus_radii, branch_bounds, check_all, check_linear_smallness,
    check_ratio_condition, growth_constants, Status, Variant};
use cnls_core::model::{CoefficientSet, Grid, Nonlinearity, Problem};
use cnls_core::operator::{apply_t, apply_t_parts, cone_gap, Kernels, WavePair};
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random problem on `[-20, 20]`: piecewise `a, d`, bump couplings with
/// `b, e` up to `max_ratio` times the potential floor.
fn random_problem(rng: &mut ChaCha8Rng, max_ratio: f64) -> Problem {
    let a = random_potential(rng, 4, 0.5, 4.0);
    let d = random_potential(rng, 4, 0.5, 4.0);
    let mut coupling = |scale: f64| {
        let (lo, hi) = random_interval(rng, 2.0);
        bump(rng.gen_range(0.05 * scale..scale), lo, hi)
    };
    let set = CoefficientSet {
        b: coupling(max_ratio * a.infimum()),
        c: coupling(2.0),
        e: coupling(max_ratio * d.infimum()),
        f: coupling(2.0),
        a,
        d,
    };
    let nl = if rng.gen_bool(0.5) {
        Nonlinearity::decoupled_cubic()
    } else {
        Nonlinearity::spinor_cubic()
    };
    Problem::new(set, nl, Grid::symmetric(20.0, 801).unwrap()).unwrap()
}

fn random_pair(rng: &mut ChaCha8Rng, grid: &Grid) -> WavePair {
    WavePair::new(random_profile(rng, grid), random_profile(rng, grid))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn operator_maps_the_cone_into_itself(seed in any::<u64>(), amp in 0.05f64..6.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_problem(&mut rng, 0.9);
        let k = Kernels::full_line(&p).unwrap();
        prop_assume!(check_all(&p, &k).all_required_pass());
        let cone = k.cone(&p).unwrap();
        let grid = *p.grid();
        let mut u = random_pair(&mut rng, &grid);
        for (i, v) in [&mut u.u1, &mut u.u2].into_iter().enumerate() {
            for j in grid.nodes_in(cone.support.0, cone.support.1) {
                v[j] = v[j].max(cone.product(i));
            }
        }
        let u = u.scaled(amp);
        prop_assert!(cone_gap(&u, &cone, &grid).iter().all(|&g| g >= -1e-12));
        let tu = apply_t(&p, &k, &u);
        prop_assert!(tu.min_value() >= 0.0);
        let norm = tu.norm();
        for g in cone_gap(&tu, &cone, &grid) {
            prop_assert!(g >= -1e-9 * norm, "gap {g} at norm {norm}");
        }
    }

    #[test]
    fn linear_part_is_homogeneous_and_nonlinear_part_cubic(seed in any::<u64>(), t in 0.1f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_problem(&mut rng, 0.9);
        let k = Kernels::full_line(&p).unwrap();
        let u = random_pair(&mut rng, p.grid());
        let (l1, n1) = apply_t_parts(&p, &k, &u);
        let (lt, nt) = apply_t_parts(&p, &k, &u.scaled(t));
        prop_assert!(lt.distance(&l1.scaled(t)) <= 1e-12 * t * l1.norm().max(1e-300));
        prop_assert!(nt.distance(&n1.scaled(t * t * t)) <= 1e-12 * t * t * t * n1.norm().max(1e-300));
    }

    #[test]
    fn ratio_condition_implies_linear_smallness(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_problem(&mut rng, 1.3);
        let k = Kernels::full_line(&p).unwrap();
        let ratio = check_ratio_condition(&p).unwrap();
        let small = check_linear_smallness(&p, &k);
        if ratio.status == Status::Pass {
            prop_assert_eq!(small.status, Status::Pass);
        }
        // sup b/a bounds int G1 b from above
        let w = small.witness_value("max_G1b").unwrap();
        let r = ratio.witness_value("sup_b_over_a").unwrap();
        prop_assert!(w <= r * (1.0 + 1e-6), "{w} > {r}");
    }

    #[test]
    fn annulus_radii_are_ordered(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_problem(&mut rng, 0.9);
        let k = Kernels::full_line(&p).unwrap();
        prop_assume!(check_all(&p, &k).all_required_pass());
        let cone = k.cone(&p).unwrap();
        let gc = growth_constants(p.nonlinearity(), &cone).unwrap();
        let radii = annulus_radii(&p, &k, &gc).unwrap();
        prop_assert!(radii.r > 0.0 && radii.r < radii.big_r);
        prop_assert!(radii.b + radii.c_max * radii.r * radii.r <= 1.0 + 1e-12);
        prop_assert!(radii.r <= gc.r0 + 1e-12);
        prop_assert!(radii.big_r >= gc.big_r0 - 1e-12);
    }

    #[test]
    fn branch_bounds_shrink_as_lambda_grows(seed in any::<u64>(), l1 in 0.05f64..5.0, l2 in 0.05f64..5.0) {
        prop_assume!((l1 - l2).abs() > 1e-6);
        let (lo, hi) = if l1 < l2 { (l1, l2) } else { (l2, l1) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_problem(&mut rng, 0.9);
        let k = Kernels::full_line(&p).unwrap();
        prop_assume!(check_all(&p, &k).all_required_pass());
        let a = branch_bounds(&p, &k, lo, Variant::NonlinearScaled).unwrap();
        let b = branch_bounds(&p, &k, hi, Variant::NonlinearScaled).unwrap();
        prop_assert!(b.r < a.r && b.big_r < a.big_r);
        prop_assert!((a.r * lo.sqrt() - b.r * hi.sqrt()).abs() <= 1e-12 * a.r * lo.sqrt());
    }
}

#[test]
fn fully_scaled_branch_stops_at_the_parameter_bound() {
    let p = weakly_coupled(1501);
    let k = Kernels::full_line(&p).unwrap();
    let inside = branch_bounds(&p, &k, 0.5, Variant::FullyScaled).unwrap();
    let bound = inside.parameter_bound.unwrap();
    assert!(bound > 1.0);
    assert!(branch_bounds(&p, &k, bound * 1.01, Variant::FullyScaled).is_err());
}
