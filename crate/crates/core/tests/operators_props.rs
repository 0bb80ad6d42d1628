mod common;

use aamr::operators::modified_reflect;
use aamr::{AamrOperator, ConvexSet, DrOperator, Operator};
use common::{close, gaussian, random_set, rng, subspace, KINDS};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn aamr_operator_is_nonexpansive(
        seed in any::<u64>(), ka in 0..KINDS, kb in 0..KINDS, n in 2usize..6,
        alpha in 0.01f64..=1.0, beta in 0.01f64..0.99,
    ) {
        let mut r = rng(seed);
        let t = AamrOperator::new(random_set(&mut r, n, ka), random_set(&mut r, n, kb), alpha, beta).unwrap();
        let x = gaussian(&mut r, n) * 5.0;
        let y = gaussian(&mut r, n) * 5.0;
        let d = (&x - &y).norm();
        prop_assert!((t.apply(&x) - t.apply(&y)).norm() <= d * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn drift_identity(
        seed in any::<u64>(), ka in 0..KINDS, kb in 0..KINDS, n in 2usize..6,
        alpha in 0.01f64..=1.0, beta in 0.01f64..0.99,
    ) {
        let mut r = rng(seed);
        let t = AamrOperator::new(random_set(&mut r, n, ka), random_set(&mut r, n, kb), alpha, beta).unwrap();
        let x = gaussian(&mut r, n) * 5.0;
        let lhs = &x - t.apply(&x);
        prop_assert!(close(&lhs, &t.drift(&x), 1e-12));
    }

    #[test]
    fn modified_reflector_fixes_beta_times_projection_of_origin(
        seed in any::<u64>(), k in 0..KINDS, n in 2usize..6, beta in 0.01f64..=1.0,
    ) {
        let mut r = rng(seed);
        let c = random_set(&mut r, n, k);
        let fixed = c.project(&aamr::Vector::zeros(n)) * beta;
        prop_assert!(close(&modified_reflect(&c, beta, &fixed).unwrap(), &fixed, 1e-12));
    }

    #[test]
    fn affine_translation_formula(
        seed in any::<u64>(), n in 3usize..7, alpha in 0.01f64..0.99, beta in 0.01f64..0.99,
    ) {
        let mut r = rng(seed);
        let y = gaussian(&mut r, n);
        let u = subspace(&mut r, n, n - 1);
        let v = subspace(&mut r, n, 1 + (seed as usize) % (n - 1));
        let a = ConvexSet::affine(y.clone(), u.clone()).unwrap();
        let b = ConvexSet::affine(y.clone(), v.clone()).unwrap();
        let t = AamrOperator::new(a, b, alpha, beta).unwrap();
        let t0 = AamrOperator::new(ConvexSet::Subspace(u), ConvexSet::Subspace(v), alpha, beta).unwrap();
        let x = gaussian(&mut r, n) * 3.0;
        let expected = t0.apply(&x) + t.apply(&aamr::Vector::zeros(n));
        prop_assert!(close(&t.apply(&x), &expected, 1e-11));
    }

    #[test]
    fn step_equals_scaled_residual(
        seed in any::<u64>(), ka in 0..KINDS, kb in 0..KINDS, n in 2usize..6,
        alpha in 0.01f64..=1.0, beta in 0.01f64..0.99,
    ) {
        let mut r = rng(seed);
        let t = AamrOperator::new(random_set(&mut r, n, ka), random_set(&mut r, n, kb), alpha, beta).unwrap();
        let x = gaussian(&mut r, n) * 5.0;
        let step = (&x - t.apply(&x)).norm();
        prop_assert!((step - 2.0 * alpha * beta * t.fixed_point_residual(&x)).abs() <= 1e-12 * (1.0 + x.norm()));
    }

    #[test]
    fn orthogonal_complement_of_the_sum_is_fixed(seed in any::<u64>(), n in 4usize..8, alpha in 0.01f64..=1.0, beta in 0.01f64..0.99) {
        // For subspaces, x ⊥ A + B gives P_A x = 0 = P_B(-x), so the residual vanishes and T x = x.
        let mut r = rng(seed);
        let (u, v) = (subspace(&mut r, n, 1), subspace(&mut r, n, 2));
        let mut both = u.basis().clone().insert_columns(1, 2, 0.0);
        both.columns_mut(1, 2).copy_from(v.basis());
        let sum = aamr::LinearSubspace::from_columns(&both).unwrap();
        let x = sum.orthogonal_complement().project(&gaussian(&mut r, n));
        let t = AamrOperator::new(ConvexSet::Subspace(u), ConvexSet::Subspace(v), alpha, beta).unwrap();
        prop_assert!(t.fixed_point_residual(&x) <= 1e-12 * (1.0 + x.norm()));
        prop_assert!(close(&t.apply(&x), &x, 1e-12));
    }

    #[test]
    fn dr_operator_is_nonexpansive(seed in any::<u64>(), ka in 0..KINDS, kb in 0..KINDS, n in 2usize..6, alpha in 0.01f64..0.99) {
        let mut r = rng(seed);
        let t = DrOperator::new(random_set(&mut r, n, ka), random_set(&mut r, n, kb), alpha).unwrap();
        let x = gaussian(&mut r, n) * 5.0;
        let y = gaussian(&mut r, n) * 5.0;
        prop_assert!((t.apply(&x) - t.apply(&y)).norm() <= (&x - &y).norm() * (1.0 + 1e-12) + 1e-12);
    }
}
