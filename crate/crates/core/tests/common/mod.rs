#![allow(dead_code)]

use nalgebra::DMatrix;
use nca_core::{OperatorMatrix, SuperOp, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn random_matrix(n: usize, rng: &mut impl Rng) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn random_operator(n: usize, rng: &mut impl Rng) -> OperatorMatrix {
    OperatorMatrix::from_matrix(random_matrix(n, rng)).unwrap()
}

pub fn random_hermitian(n: usize, rng: &mut impl Rng) -> OperatorMatrix {
    let a = random_matrix(n, rng);
    OperatorMatrix::from_matrix((&a + a.adjoint()) * c(0.5, 0.0)).unwrap()
}

/// Hermitian with unit trace, not necessarily positive.
pub fn random_unit_trace_hermitian(n: usize, rng: &mut impl Rng) -> OperatorMatrix {
    let mut m = random_hermitian(n, rng).into_matrix();
    let tr: C64 = m.trace();
    for k in 0..n {
        m[(k, k)] += c((1.0 - tr.re) / n as f64, 0.0);
    }
    OperatorMatrix::from_matrix(m).unwrap()
}

pub fn random_superop(n: usize, rng: &mut impl Rng) -> SuperOp {
    SuperOp::from_matrix(random_matrix(n * n, rng)).unwrap()
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().fold(0.0, |m, z| m.max(z.norm()))
}
