mod common;

use common::*;
use nalgebra::DMatrix;
use nca_core::analysis::eigen_decomposition;
use nca_core::hybridization::Branch;
use nca_core::liouville::{
    build_liouvillian, contour_superop, left_mult, matrix_exp, right_mult, unvectorize, vectorize,
    JumpOperator, LindbladModel, OpKind,
};
use nca_core::model::{annihilation, SingleLevel};
use nca_core::{NcaError, OperatorMatrix, SuperOp, C64};
use proptest::prelude::*;

fn nearest(vals: &[C64], z: C64) -> f64 {
    vals.iter().map(|v| (v - z).norm()).fold(f64::INFINITY, f64::min)
}

#[test]
fn case_study_spectrum_matches_closed_form() {
    for &(eps0, gl, gp, gd) in &[(5.0, 0.5, 0.5, 0.5), (1.5, 0.3, 0.2, 0.4), (-2.0, 1.0, 0.0, 0.0)] {
        let l = SingleLevel::case_study(eps0, gl, gp, gd).liouvillian().unwrap();
        let (vals, _) = eigen_decomposition(l.as_matrix()).unwrap();
        let g = gl + gp;
        let expected = vec![
            c(0.0, 0.0),
            c(-g, 0.0),
            c(-g / 2.0 - gd / 2.0, eps0),
            c(-g / 2.0 - gd / 2.0, -eps0),
        ];
        for z in expected {
            assert!(nearest(&vals, z) < 1e-12, "eps0={eps0}: {z} not in {vals:?}");
        }
    }
}

#[test]
fn stationary_state_is_half_filled_for_equal_rates() {
    let l = SingleLevel::case_study(5.0, 0.5, 0.5, 0.5).liouvillian().unwrap();
    let rho = OperatorMatrix::from_row_major(2, &[c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
    let out = l.apply(&vectorize(&rho));
    assert!(out.entries().iter().all(|z| z.norm() < 1e-15));
}

#[test]
fn trace_annihilation_of_generator() {
    let mut r = rng(1);
    for _ in 0..20 {
        let h = random_hermitian(3, &mut r);
        let jumps = (0..3)
            .map(|_| JumpOperator {
                operator: random_operator(3, &mut r),
                rate: r_rate(&mut r),
            })
            .collect();
        let l = build_liouvillian(&LindbladModel::new(h, jumps).unwrap()).unwrap();
        assert!(l.trace_annihilation_error() < 1e-12);
    }
}

fn r_rate(r: &mut impl rand::Rng) -> f64 {
    r.gen_range(0.0..2.0)
}

#[test]
fn exponential_matches_eigen_decomposition() {
    let l = SingleLevel::case_study(1.5, 0.3, 0.2, 0.4).liouvillian().unwrap();
    let (vals, p) = eigen_decomposition(l.as_matrix()).unwrap();
    let pinv = p.clone().try_inverse().unwrap();
    for &t in &[0.1, 0.7, 3.0] {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(4, vals.iter().map(|z| (z * t).exp())));
        let exact = &p * d * &pinv;
        let v = matrix_exp(&l, t).unwrap();
        assert!(max_abs_diff(v.as_matrix(), &exact) < 1e-10, "t={t}");
    }
}

#[test]
fn exponential_semigroup_and_stationary_invariance() {
    let l = SingleLevel::case_study(5.0, 0.5, 0.5, 0.5).liouvillian().unwrap();
    let a = matrix_exp(&l, 0.4).unwrap();
    let b = matrix_exp(&l, 1.1).unwrap();
    let ab = matrix_exp(&l, 1.5).unwrap();
    assert!(max_abs_diff((&a * &b).as_matrix(), ab.as_matrix()) < 1e-12);
    let half = OperatorMatrix::identity(2).scale(c(0.5, 0.0));
    let out = unvectorize(&matrix_exp(&l, 7.3).unwrap().apply(&vectorize(&half)));
    assert!(max_abs_diff(out.as_matrix(), half.as_matrix()) < 1e-12);
}

#[test]
fn exponential_domain() {
    let l = SingleLevel::case_study(1.0, 0.5, 0.5, 0.5).liouvillian().unwrap();
    assert!(matches!(matrix_exp(&l, -0.1), Err(NcaError::Domain(_))));
    assert_eq!(matrix_exp(&l, 0.0).unwrap(), SuperOp::identity(2));
}

#[test]
fn contour_superops_act_on_the_correct_side() {
    let d = annihilation();
    let mut r = rng(7);
    let rho = random_operator(2, &mut r);
    let apply = |s: &SuperOp| unvectorize(&s.apply(&vectorize(&rho)));
    let cases = [
        (OpKind::Annihilate, Branch::Plus, &d * &rho),
        (OpKind::Create, Branch::Plus, &d.dagger() * &rho),
        (OpKind::Annihilate, Branch::Minus, &rho * &d),
        (OpKind::Create, Branch::Minus, &rho * &d.dagger()),
    ];
    for (kind, branch, expected) in cases {
        let got = apply(&contour_superop(kind, branch, &d));
        assert!(max_abs_diff(got.as_matrix(), expected.as_matrix()) < 1e-15, "{kind:?} {branch:?}");
    }
}

fn arb_matrix(n: usize) -> impl Strategy<Value = OperatorMatrix> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
        let entries: Vec<C64> = v.into_iter().map(|(a, b)| c(a, b)).collect();
        OperatorMatrix::from_row_major(n, &entries).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kronecker_sides_commute_and_compose(a in arb_matrix(3), b in arb_matrix(3), x in arb_matrix(3)) {
        let lr = &left_mult(&a) * &right_mult(&b);
        let rl = &right_mult(&b) * &left_mult(&a);
        prop_assert!(max_abs_diff(lr.as_matrix(), rl.as_matrix()) < 1e-12);
        let got = unvectorize(&lr.apply(&vectorize(&x)));
        let want = &(&a * &x) * &b;
        prop_assert!(max_abs_diff(got.as_matrix(), want.as_matrix()) < 1e-12);
        let ll = &left_mult(&a) * &left_mult(&b);
        prop_assert!(max_abs_diff(ll.as_matrix(), left_mult(&(&a * &b)).as_matrix()) < 1e-12);
        let rr = &right_mult(&a) * &right_mult(&b);
        prop_assert!(max_abs_diff(rr.as_matrix(), right_mult(&(&b * &a)).as_matrix()) < 1e-12);
    }

    #[test]
    fn vectorize_round_trip(x in arb_matrix(4)) {
        prop_assert_eq!(unvectorize(&vectorize(&x)), x);
    }

    #[test]
    fn lindblad_flow_preserves_hermiticity(
        h in arb_matrix(2),
        jump in arb_matrix(2),
        rate in 0.0f64..2.0,
        rho in arb_matrix(2),
        t in 0.0f64..3.0,
    ) {
        let h = OperatorMatrix::from_matrix((h.as_matrix() + h.as_matrix().adjoint()) * c(0.5, 0.0)).unwrap();
        let rho = OperatorMatrix::from_matrix((rho.as_matrix() + rho.as_matrix().adjoint()) * c(0.5, 0.0)).unwrap();
        let model = LindbladModel::new(h, vec![JumpOperator { operator: jump, rate }]).unwrap();
        let v = matrix_exp(&build_liouvillian(&model).unwrap(), t).unwrap();
        let out = unvectorize(&v.apply(&vectorize(&rho)));
        prop_assert!(out.hermiticity_error() < 1e-12);
        prop_assert!((out.trace() - rho.trace()).norm() < 1e-12);
    }
}
