use num_complex::Complex64 as C64;
use proptest::prelude::*;

use kdv_ginibre::distribution::sigma_factor;
use kdv_ginibre::ginibre_mc::{ks_distance_to, Cdf, EmpiricalCdf};
use kdv_ginibre::quadrature::ContourGrid;
use kdv_ginibre::rhp::{build_jump, default_grid, eval_m, solve_sie};
use kdv_ginibre::scattering::{reflection_r, Side};
use kdv_ginibre::GammaParam;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reflection_symmetry_and_bound(g in 0.0f64..=1.0, re in -6.0f64..6.0, im in -3.0f64..3.0) {
        let p = GammaParam::new(g).unwrap();
        let k = C64::new(re, im);
        let a = reflection_r(k, &p);
        let b = reflection_r(-k.conj(), &p).conj();
        prop_assert!((a - b).norm() <= 1e-15 * a.norm().max(1.0));
        let real = reflection_r(C64::new(re, 0.0), &p);
        prop_assert!(real.norm() <= p.sqrt_gamma() + 1e-16);
        if re != 0.0 && g == 1.0 {
            prop_assert!(real.norm() < 1.0);
        }
    }

    #[test]
    fn jump_is_unimodular_with_zero_corner(g in 0.0f64..=1.0, x in -8.0f64..8.0, t in -0.05f64..0.05) {
        let p = GammaParam::new(g).unwrap();
        let grid = ContourGrid::uniform(0.1, 12.0).unwrap();
        let j = build_jump(x, t, &p, &grid).unwrap();
        for m in j.values() {
            prop_assert!((m.det() - 1.0).norm() < 1e-13);
            prop_assert!((m.get(0, 1).norm() - m.get(1, 0).norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn sigma_factor_positive(sigma in -30.0f64..30.0, g in 0.0f64..=1.0) {
        let v = sigma_factor(sigma, g.sqrt()).unwrap();
        prop_assert!(v > 0.0);
        if g == 1.0 {
            prop_assert!((v - (-sigma / 2.0).exp()).abs() <= 1e-14 * v);
        }
    }

    #[test]
    fn empirical_cdf_monotone_and_self_consistent(samples in prop::collection::vec(-5.0f64..5.0, 1..60), probes in prop::collection::vec(-6.0f64..6.0, 2..20)) {
        let e = EmpiricalCdf::from_samples(samples).unwrap();
        let mut sorted = probes.clone();
        sorted.sort_by(f64::total_cmp);
        let vals: Vec<f64> = sorted.iter().map(|&s| e.eval(s)).collect();
        prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(vals.iter().all(|v| (0.0..=1.0).contains(v)));
        for &s in &sorted {
            prop_assert!(e.eval_left(s) <= e.eval(s));
        }
        prop_assert_eq!(ks_distance_to(&e, &e), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn rhp_solution_invariants(g in 0.05f64..=1.0, x in -5.0f64..4.0, re in -2.5f64..2.5, im in 0.1f64..2.0) {
        let p = GammaParam::new(g).unwrap();
        let sol = solve_sie(x, 0.0, &p, &default_grid(x, 0.0).unwrap()).unwrap();
        prop_assert!(sol.residual < 1e-8);
        prop_assert!(sol.int_q2 >= 0.0);
        for k in [C64::new(re, im), C64::new(re, -im)] {
            let m = eval_m(k, &sol, Side::Plus).unwrap();
            prop_assert!((m.det() - 1.0).norm() < 1e-8);
            let mc = eval_m(k.conj(), &sol, Side::Plus).unwrap();
            prop_assert!((mc.conj().sigma1_conjugate() - m).max_abs() < 1e-8);
            let mn = eval_m(-k, &sol, Side::Plus).unwrap();
            prop_assert!((mn.sigma1_conjugate() - m).max_abs() < 1e-8);
        }
    }
}
