mod common;

use proptest::prelude::*;
use qecmet_core::operators::{eig_hermitian, operator_norm, trace_abs};
use qecmet_core::optimize::{
    brute_force_dual, dual_minimize, dual_objective, optimal_code, primal_recover, verify_duality, DualOptions,
    OracleSpec, PrimalOptions, ORACLE_MAX_SPAN,
};
use qecmet_core::presets::kerr_model;
use qecmet_core::span::{decompose, hnls_check, DEFAULT_HNLS_TOL};
use qecmet_core::code::check_conditions;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn kerr_dual_matches_closed_form() {
    for n in [2usize, 4, 6] {
        let v = hnls_check(&kerr_model(n, 0.5).unwrap(), DEFAULT_HNLS_TOL).unwrap();
        let dual = dual_minimize(&v.g_perp, &v.basis, &DualOptions::default()).unwrap();
        let want = (n * n) as f64 / 8.0;
        assert!((dual.s_star - want).abs() < 1e-7, "n̄={n}: {}", dual.s_star);
        assert!(dual.converged);
    }
}

#[test]
fn kerr_optimal_code_satisfies_conditions() {
    let m = kerr_model(4, 1.0).unwrap();
    let v = hnls_check(&m, DEFAULT_HNLS_TOL).unwrap();
    let dual = dual_minimize(&v.g_perp, &v.basis, &DualOptions::default()).unwrap();
    let primal = primal_recover(&dual, &v.basis, &PrimalOptions::default()).unwrap();
    assert!(primal.rank_one.is_some());
    let code = optimal_code(&primal).unwrap();
    assert_eq!(code.ancilla_dim(), 2);
    let rep = check_conditions(&code, &m, 1e-9).unwrap();
    assert!(rep.holds(), "{}", rep.summary());
    assert!((rep.gap_3 - 4.0).abs() < 1e-8);
}

#[test]
fn oracle_rejects_large_spans() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    loop {
        let m = common::random_hnls_model(&mut rng);
        let v = hnls_check(&m, DEFAULT_HNLS_TOL).unwrap();
        if v.basis.len() > ORACLE_MAX_SPAN {
            assert!(brute_force_dual(&v.g_perp, &v.basis, OracleSpec::default()).is_err());
            break;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn objective_is_convex(seed in any::<u64>(), theta in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = common::random_hnls_model(&mut rng);
        let v = hnls_check(&m, DEFAULT_HNLS_TOL).unwrap();
        let n = v.basis.len();
        let a: Vec<f64> = (0..n).map(|_| 2.0 * common::gaussian(&mut rng)).collect();
        let b: Vec<f64> = (0..n).map(|_| 2.0 * common::gaussian(&mut rng)).collect();
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| theta * x + (1.0 - theta) * y).collect();
        let f = |nu: &[f64]| dual_objective(&v.g_perp, &v.basis, nu).unwrap();
        prop_assert!(f(&mix) <= theta * f(&a) + (1.0 - theta) * f(&b) + 1e-12);
    }

    #[test]
    fn dual_is_below_norm_and_oracle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = common::random_hnls_model(&mut rng);
        let v = hnls_check(&m, DEFAULT_HNLS_TOL).unwrap();
        let dual = dual_minimize(&v.g_perp, &v.basis, &DualOptions::default()).unwrap();
        prop_assert!(dual.s_star <= operator_norm(&v.g_perp).unwrap() + 1e-12);
        prop_assert!(dual.lower_bound <= dual.s_star);
        if v.basis.len() <= ORACLE_MAX_SPAN {
            let oracle = brute_force_dual(&v.g_perp, &v.basis, OracleSpec::default()).unwrap();
            prop_assert!(dual.s_star <= oracle + 1e-4);
            prop_assert!((dual.s_star - oracle).abs() < 1e-6);
        }
    }

    #[test]
    fn weak_duality_for_random_feasible_points(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = common::random_hnls_model(&mut rng);
        let v = hnls_check(&m, DEFAULT_HNLS_TOL).unwrap();
        let dual = dual_minimize(&v.g_perp, &v.basis, &DualOptions::default()).unwrap();
        for _ in 0..5 {
            // Random traceless direction orthogonal to the span, scaled to tr|G̃| = 2.
            let (_, x) = decompose(&common::random_hermitian(&mut rng, m.dim()), &v.basis).unwrap();
            let norm = trace_abs(&x).unwrap();
            if norm < 1e-9 {
                continue;
            }
            let g = x.scale(2.0 / norm);
            let obj = (g.matrix() * v.g_perp.matrix()).trace().re;
            prop_assert!(obj <= 2.0 * dual.s_star + 1e-8);
        }
    }

    #[test]
    fn primal_optimum_closes_the_gap(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = common::random_hnls_model(&mut rng);
        let v = hnls_check(&m, DEFAULT_HNLS_TOL).unwrap();
        let dual = dual_minimize(&v.g_perp, &v.basis, &DualOptions::default()).unwrap();
        let primal = primal_recover(&dual, &v.basis, &PrimalOptions::default()).unwrap();
        let rep = verify_duality(&dual, &primal, 1e-6).unwrap();
        prop_assert!(rep.holds());
        let code = optimal_code(&primal).unwrap();
        let qec = check_conditions(&code, &m, 1e-7).unwrap();
        prop_assert!(qec.holds(), "{}", qec.summary());
    }

    #[test]
    fn noiseless_optimum_is_half_the_spread(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = rng.random_range(2..=6);
        let g = common::random_hermitian(&mut rng, d);
        let m = qecmet_core::LindbladModel::new(g, vec![], vec![], 1.0).unwrap();
        let v = hnls_check(&m, DEFAULT_HNLS_TOL).unwrap();
        let dual = dual_minimize(&v.g_perp, &v.basis, &DualOptions::default()).unwrap();
        let spec = eig_hermitian(m.generator()).unwrap();
        prop_assert!((dual.s_star - (spec.max() - spec.min()) / 2.0).abs() < 1e-7);
    }
}
