//! Property tests for the algebraic invariants: exponential laws on
//! commuting families, unitarity, norm submultiplicativity, commutator
//! antisymmetry, propagator composition, and seeded determinism.

use expmid::integrators::{propagate, SchemeKind};
use expmid::linalg::{commutator, seeded_matrix, seeded_skew_hermitian, Matrix};
use expmid::operators::{family_smooth_noncommuting, family_weierstrass};
use proptest::prelude::*;

fn op_norm(m: &Matrix) -> f64 {
    m.operator_norm().expect("operator norm")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn expm_is_additive_on_commuting_polynomials(
        seed in 0u64..1000,
        dim in 2usize..6,
        a in -0.5f64..0.5,
        b in -0.3f64..0.3,
    ) {
        // Polynomials in one matrix commute with each other.
        let m = seeded_matrix(dim, seed, 0).scale_re(0.7);
        let m2 = &m * &m;
        let p1 = &m.scale_re(a) + &m2.scale_re(b);
        let p2 = &m.scale_re(b) + &m2.scale_re(-a);
        prop_assert!(op_norm(&commutator(&p1, &p2).unwrap()) <= 1e-12);
        let lhs = p1.expm().unwrap().try_mul(&p2.expm().unwrap()).unwrap();
        let rhs = (&p1 + &p2).expm().unwrap();
        prop_assert!(op_norm(&(&lhs - &rhs)) <= 1e-10);
    }

    #[test]
    fn expm_of_skew_hermitian_is_unitary(
        seed in 0u64..1000,
        dim in 2usize..7,
        scale in 0.1f64..4.0,
    ) {
        let m = seeded_skew_hermitian(dim, seed, 0).scale_re(scale);
        let e = m.expm().unwrap();
        let resid = &e.adjoint().try_mul(&e).unwrap() - &Matrix::identity(dim);
        prop_assert!(op_norm(&resid) <= 1e-10);
    }

    #[test]
    fn operator_norm_is_submultiplicative(
        seed in 0u64..1000,
        dim in 2usize..7,
    ) {
        let a = seeded_matrix(dim, seed, 0);
        let b = seeded_matrix(dim, seed, 1);
        let nab = op_norm(&a.try_mul(&b).unwrap());
        prop_assert!(nab <= op_norm(&a) * op_norm(&b) * (1.0 + 1e-8));
    }

    #[test]
    fn commutator_is_antisymmetric(
        seed in 0u64..1000,
        dim in 1usize..6,
    ) {
        let u = seeded_matrix(dim, seed, 0);
        let v = seeded_matrix(dim, seed, 1);
        let uv = commutator(&u, &v).unwrap();
        let vu = commutator(&v, &u).unwrap();
        prop_assert_eq!((&uv + &vu).norm_frobenius(), 0.0);
    }

    #[test]
    fn midpoint_propagation_composes_on_aligned_grids(
        seed in 0u64..200,
        m in 1usize..5,
    ) {
        let m_steps = 1usize << m;
        let f = family_weierstrass(3, 0.5, seed).unwrap();
        let (s, t) = (0.0, 1.0);
        let r = 0.5;
        let whole = propagate(&f, s, t, 2 * m_steps, SchemeKind::Midpoint).unwrap();
        let first = propagate(&f, s, r, m_steps, SchemeKind::Midpoint).unwrap();
        let second = propagate(&f, r, t, m_steps, SchemeKind::Midpoint).unwrap();
        let composed = second.w.try_mul(&first.w).unwrap();
        prop_assert!(op_norm(&(&whole.w - &composed)) <= 1e-13);
    }

    #[test]
    fn propagators_of_skew_families_stay_unitary(
        seed in 0u64..200,
        n in 1usize..64,
    ) {
        let f = family_smooth_noncommuting(4, seed).unwrap();
        let w = propagate(&f, 0.0, 1.0, n, SchemeKind::Midpoint).unwrap().w;
        let resid = &w.adjoint().try_mul(&w).unwrap() - &Matrix::identity(4);
        prop_assert!(op_norm(&resid) <= n as f64 * 1e-12);
    }

    #[test]
    fn families_are_bitwise_deterministic(
        seed in 0u64..1000,
        t in -3.0f64..3.0,
    ) {
        let f1 = family_weierstrass(3, 0.5, seed).unwrap();
        let f2 = family_weierstrass(3, 0.5, seed).unwrap();
        prop_assert_eq!(f1.eval(t), f2.eval(t));
    }

    #[test]
    fn split_recomposes_evaluation(
        seed in 0u64..1000,
        t in -3.0f64..3.0,
    ) {
        let f = family_weierstrass(4, 0.5, seed).unwrap();
        let (a0, v) = f.split_parts().unwrap();
        let direct = f.eval(t);
        let resid = (&direct - &(a0 + &v(t))).norm_frobenius();
        prop_assert!(resid <= 1e-14 * (1.0 + direct.norm_frobenius()));
    }
}
