mod common;

use common::*;
use nalgebra::DMatrix;
use nca_core::hybridization::{flat_band_greater, flat_band_lesser, FlatBandParams};
use nca_core::model::{annihilation, SingleLevel};
use nca_core::nca::nca_self_energy;
use nca_core::{NcaError, SuperOp, C64};

fn problem(eta: f64) -> nca_core::NcaProblem {
    SingleLevel::case_study(5.0, 0.5, 0.5, 0.5)
        .problem(FlatBandParams::new(eta, 10.0).unwrap(), 0.02, 50)
        .unwrap()
}

#[test]
fn self_energy_annihilates_the_trace() {
    let prob = problem(1.0);
    let mut r = rng(3);
    for lag in [0usize, 1, 7, 50] {
        for _ in 0..10 {
            let v = random_superop(2, &mut r);
            let s = prob.self_energy_at_lag(&v, lag).unwrap();
            assert!(s.trace_annihilation_error() < 1e-12, "lag {lag}");
        }
    }
}

fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    DMatrix::from_fn(n * n, n * n, |r, col| a[(r / n, col / n)] * b[(r % n, col % n)])
}

// Sixteen terms written out one by one: D±, D±† acting from the left
// (+ branch) or the right (− branch, transposed).
fn brute_force(v: &DMatrix<C64>, lag: i64, p: FlatBandParams, dt: f64) -> DMatrix<C64> {
    let d = annihilation().into_matrix();
    let dd = d.adjoint();
    let id = DMatrix::<C64>::identity(2, 2);
    let dp = kron(&d, &id);
    let dm = kron(&id, &d.transpose());
    let ddp = kron(&dd, &id);
    let ddm = kron(&id, &dd.transpose());
    let t = lag as f64 * dt;
    let les = flat_band_lesser(t, p);
    let gre = flat_band_greater(t, p);
    let les_neg = flat_band_lesser(-t, p);
    let gre_neg = flat_band_greater(-t, p);
    let i = c(0.0, 1.0);
    let mut s = DMatrix::<C64>::zeros(4, 4);
    // hole terms: −β i Δ^{βα}(τ) D†_β V D_α, τ → 0⁺ at lag 0
    s += (&ddp * v * &dp) * (-i * gre); // β=+, α=+: time-ordered, τ>0
    s += (&ddp * v * &dm) * (-i * les); // β=+, α=−
    s += (&ddm * v * &dp) * (i * gre); // β=−, α=+
    s += (&ddm * v * &dm) * (i * les); // β=−, α=−: anti-time-ordered, τ>0
    // particle terms: −β i ξ Δ^{αβ}(−τ) D_β V D†_α, ξ = −1
    s += (&dp * v * &ddp) * (i * les_neg); // α=β=+: time-ordered at −τ
    s += (&dp * v * &ddm) * (i * gre_neg); // β=+, α=−: Δ^{−+}
    s += (&dm * v * &ddp) * (-i * les_neg); // β=−, α=+: Δ^{+−}
    s += (&dm * v * &ddm) * (-i * gre_neg); // α=β=−: anti-time-ordered at −τ
    s
}

#[test]
fn self_energy_matches_term_by_term_assembly() {
    let p = FlatBandParams::new(0.7, 10.0).unwrap();
    let prob = SingleLevel::case_study(1.0, 0.5, 0.5, 0.5).problem(p, 0.02, 40).unwrap();
    let mut r = rng(5);
    for lag in [0usize, 1, 13, 40] {
        let v = random_superop(2, &mut r);
        let got = prob.self_energy_at_lag(&v, lag).unwrap();
        let want = brute_force(v.as_matrix(), lag as i64, p, 0.02);
        assert!(max_abs_diff(got.as_matrix(), &want) < 1e-13, "lag {lag}");
    }
    let id = SuperOp::identity(2);
    let got = prob.self_energy_at_lag(&id, 0).unwrap();
    let want = brute_force(id.as_matrix(), 0, p, 0.02);
    assert!(max_abs_diff(got.as_matrix(), &want) < 1e-13);
}

#[test]
fn self_energy_is_linear_in_eta() {
    let mut r = rng(9);
    let v = random_superop(2, &mut r);
    let base = problem(1.0);
    for scale in [2.0, 0.5] {
        let scaled = problem(scale);
        for lag in [0usize, 5, 30] {
            let a = scaled.self_energy_at_lag(&v, lag).unwrap();
            let b = base.self_energy_at_lag(&v, lag).unwrap().scale(c(scale, 0.0));
            assert!(max_abs_diff(a.as_matrix(), b.as_matrix()) < 1e-12 * b.max_abs().max(1.0));
        }
    }
}

#[test]
fn self_energy_vanishes_without_coupling() {
    let prob = problem(0.0);
    let mut r = rng(2);
    let v = random_superop(2, &mut r);
    assert_eq!(prob.self_energy_at_lag(&v, 3).unwrap(), SuperOp::zeros(2));
}

#[test]
fn two_time_entry_point_checks_ordering_and_grid() {
    let prob = problem(1.0);
    let v = SuperOp::identity(2);
    let a = nca_self_energy(&v, 0.3, 0.1, &prob).unwrap();
    let b = prob.self_energy_at_lag(&v, 10).unwrap();
    assert_eq!(a, b);
    assert!(matches!(nca_self_energy(&v, 0.1, 0.3, &prob), Err(NcaError::Domain(_))));
    assert!(matches!(nca_self_energy(&v, 0.31, 0.3, &prob), Err(NcaError::Grid { .. })));
    assert!(matches!(nca_self_energy(&v, 2.0, 0.0, &prob), Err(NcaError::Grid { .. })));
}
