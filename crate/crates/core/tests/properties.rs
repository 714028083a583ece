use std::f64::consts::PI;

use einlab::analytic::{
    branch_environment_state, coherence_in_basis, coherence_magnitude, decoherence_factor,
    reduced_density_matrix,
};
use einlab::model::{
    build_environment_random, build_environment_scenario, Branch, EnvSpin, EnvironmentSpec,
    ScenarioKind, SystemAmplitudes,
};
use einlab::oracle::{assemble_full_state, crosscheck, evolve_full, partial_trace_to_system};
use num_complex::Complex64;
use proptest::prelude::*;

fn spin() -> impl Strategy<Value = EnvSpin> {
    (0.01f64..2.0, 0.0f64..PI, 0.0f64..2.0 * PI, 0.0f64..2.0 * PI).prop_map(|(g, theta, pa, pb)| {
        EnvSpin::new(
            g,
            Complex64::from_polar((theta / 2.0).cos(), pa),
            Complex64::from_polar((theta / 2.0).sin(), pb),
        )
    })
}

fn env(max: usize) -> impl Strategy<Value = EnvironmentSpec> {
    prop::collection::vec(spin(), 0..=max).prop_map(EnvironmentSpec::new)
}

fn system() -> impl Strategy<Value = SystemAmplitudes> {
    (0.0f64..PI, 0.0f64..2.0 * PI, 0.0f64..2.0 * PI).prop_map(|(theta, pa, pb)| {
        SystemAmplitudes::new(
            Complex64::from_polar((theta / 2.0).cos(), pa),
            Complex64::from_polar((theta / 2.0).sin(), pb),
        )
    })
}

proptest! {
    #[test]
    fn z_is_bounded_and_starts_at_one(e in env(30), t in -100.0f64..100.0) {
        prop_assert!(decoherence_factor(&e, t).magnitude() <= 1.0 + 1e-12);
        prop_assert_eq!(decoherence_factor(&e, 0.0).value, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn branch_overlap_identity(e in env(20), t in -50.0f64..50.0) {
        let plus = branch_environment_state(&e, t, Branch::Plus);
        let minus = branch_environment_state(&e, t, Branch::Minus);
        prop_assert!((minus.inner(&plus) - decoherence_factor(&e, t).value).norm() < 1e-12);
        for &(p, m) in &minus.spin_amplitudes {
            prop_assert!((p.norm_sqr() + m.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn factorization_over_concatenation(a in env(12), b in env(12), t in -50.0f64..50.0) {
        let joint = decoherence_factor(&a.concat(&b), t).value;
        let split = decoherence_factor(&a, t).value * decoherence_factor(&b, t).value;
        prop_assert!((joint - split).norm() < 1e-12);
    }

    #[test]
    fn time_reversal_conjugates(e in env(25), t in 0.0f64..100.0) {
        let fwd = decoherence_factor(&e, t).value;
        let back = decoherence_factor(&e, -t).value;
        prop_assert!((back - fwd.conj()).norm() < 1e-12);
    }

    #[test]
    fn scan_magnitude_matches_product(e in env(25), t in 0.0f64..100.0) {
        prop_assert!((coherence_magnitude(&e, t) - decoherence_factor(&e, t).magnitude()).abs() < 1e-12);
    }

    #[test]
    fn reduced_state_structure(s in system(), e in env(15), t in 0.0f64..50.0) {
        let rho = reduced_density_matrix(&s, &e, t);
        prop_assert!((rho.rho[0][0].re - s.a.norm_sqr()).abs() < 1e-12);
        prop_assert!((rho.rho[1][1].re - s.b.norm_sqr()).abs() < 1e-12);
        prop_assert!(rho.hermiticity_error() < 1e-12);
        prop_assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        prop_assert!(rho.eigenvalues()[0] >= -1e-12);
        let ab = s.a * s.b.conj();
        if ab.norm() > 1e-3 {
            prop_assert!((rho.coherence() / ab - decoherence_factor(&e, t).value).norm() < 1e-12);
        }
        prop_assert_eq!(coherence_in_basis(&rho, 0.0, 0.0).unwrap(), rho.coherence().norm());
    }

    #[test]
    fn balanced_environment_is_cos_power(n in 0usize..60, g in 0.05f64..3.0, t in 0.0f64..30.0) {
        let e = build_environment_scenario(&ScenarioKind::BalancedEqualCoupling, n, g).unwrap();
        let expected = (2.0 * g * t).cos().powi(n as i32);
        prop_assert!((decoherence_factor(&e, t).value - Complex64::new(expected, 0.0)).norm() < 1e-12);
        prop_assert!((decoherence_factor(&e, PI / (2.0 * g)).magnitude() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rotated_coherence_never_exceeds_half(s in system(), e in env(10), t in 0.0f64..20.0,
                                             theta in 0.0f64..=PI, phi in 0.0f64..2.0 * PI) {
        let rho = reduced_density_matrix(&s, &e, t);
        prop_assert!(coherence_in_basis(&rho, theta, phi).unwrap() <= 0.5 + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oracle_equivalence(s in system(), e in env(10), t in 0.0f64..20.0) {
        let report = crosscheck(&s, &e, t, 1e-10).unwrap();
        prop_assert!(report.passed, "{:?}", report);
    }

    #[test]
    fn evolution_preserves_norm_and_reverses(s in system(), e in env(10), t in -20.0f64..20.0) {
        let initial = assemble_full_state(&s, &e).unwrap();
        let evolved = evolve_full(&initial, &e, t).unwrap();
        prop_assert!((evolved.norm_sqr() - initial.norm_sqr()).abs() < 1e-12);
        let back = evolve_full(&evolved, &e, -t).unwrap();
        prop_assert!(back.max_abs_diff(&initial) < 1e-12);
    }

    #[test]
    fn spin_phases_do_not_change_reduced_state(s in system(), e in env(8), t in 0.0f64..20.0,
                                               phases in prop::collection::vec((0.0f64..2.0 * PI, 0.0f64..2.0 * PI), 8)) {
        let mut rephased = e.clone();
        for (spin, &(pa, pb)) in rephased.spins.iter_mut().zip(&phases) {
            spin.alpha *= Complex64::from_polar(1.0, pa);
            spin.beta *= Complex64::from_polar(1.0, pb);
        }
        let state = |env: &EnvironmentSpec| {
            partial_trace_to_system(&evolve_full(&assemble_full_state(&s, env).unwrap(), env, t).unwrap())
        };
        prop_assert!(state(&e).max_abs_diff(&state(&rephased)) < 1e-12);
        prop_assert!(reduced_density_matrix(&s, &e, t).max_abs_diff(&reduced_density_matrix(&s, &rephased, t)) < 1e-12);
    }

    #[test]
    fn random_builder_is_pure_function(n in 0usize..40, seed in any::<u64>(), lo in 0.01f64..1.0, width in 0.0f64..2.0) {
        let a = build_environment_random(n, seed, lo, lo + width).unwrap();
        let b = build_environment_random(n, seed, lo, lo + width).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(einlab::model::validate(&SystemAmplitudes::balanced(), &a).is_ok());
        prop_assert!(a.iter().all(|s| s.g >= lo && s.g <= lo + width));
    }
}
