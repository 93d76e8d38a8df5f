//! Vectorized (Liouville-space) operator algebra.
//!
//! An operator `ρ = Σ ρ_nm |n⟩⟨m|` on an `N`-dimensional Hilbert space is
//! flattened to a vector of length `N²` with the component of `|n⟩⟨m|` at
//! index `n·N + m`. A superoperator `ρ ↦ A ρ B` then becomes the `N²×N²`
//! matrix `A ⊗ Bᵀ`, so left multiplication is `A ⊗ 1` and right
//! multiplication is `1 ⊗ Bᵀ`.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{NcaError, Result};
use crate::hybridization::Branch;

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Dense `N×N` complex matrix on the impurity Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix(DMatrix<C64>);

impl OperatorMatrix {
    /// Builds an operator from row-major entries.
    pub fn from_row_major(dim: usize, entries: &[C64]) -> Result<Self> {
        if dim == 0 {
            return Err(NcaError::Dimension("operator dimension must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(NcaError::Dimension(format!(
                "expected {} entries for a {dim}x{dim} operator, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self(DMatrix::from_row_slice(dim, dim, entries)))
    }

    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(NcaError::Dimension(format!(
                "operator must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self(m))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    /// Projector `|k⟩⟨k|`.
    pub fn basis_projector(dim: usize, k: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        m[(k, k)] = ONE;
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn dagger(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    /// Largest entry modulus, `max |M_ij|`.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// `max |M − M†|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut err: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                err = err.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        err
    }

    /// `max|M − M†| ≤ tol · max|M|` (zero matrix counts as Hermitian).
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol * self.max_abs()
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(&self.0 - &rhs.0)
    }
}

/// Operator flattened to `N²` components, `|n⟩⟨m|` at index `n·N + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorizedOperator {
    dim: usize,
    entries: Vec<C64>,
}

impl VectorizedOperator {
    /// Wraps raw components; the length must be a perfect square.
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        let len = entries.len();
        let dim = (len as f64).sqrt().round() as usize;
        if dim == 0 || dim * dim != len {
            return Err(NcaError::Dimension(format!(
                "vectorized operator length {len} is not a positive perfect square"
            )));
        }
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    /// `⟨⟨1|v⟩⟩`, the trace of the underlying operator.
    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|n| self.entries[n * self.dim + n]).sum()
    }
}

/// Superoperator as an `N²×N²` matrix over the vectorization above.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOp {
    dim: usize,
    matrix: DMatrix<C64>,
}

impl SuperOp {
    pub fn from_matrix(matrix: DMatrix<C64>) -> Result<Self> {
        let n2 = matrix.nrows();
        let dim = (n2 as f64).sqrt().round() as usize;
        if n2 == 0 || matrix.ncols() != n2 || dim * dim != n2 {
            return Err(NcaError::Dimension(format!(
                "superoperator must be N²×N², got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { dim, matrix })
    }

    pub(crate) fn from_matrix_unchecked(dim: usize, matrix: DMatrix<C64>) -> Self {
        debug_assert_eq!(matrix.nrows(), dim * dim);
        Self { dim, matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: DMatrix::identity(dim * dim, dim * dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            matrix: DMatrix::zeros(dim * dim, dim * dim),
        }
    }

    /// Hilbert-space dimension `N` (the matrix is `N²×N²`).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn dagger(&self) -> Self {
        Self {
            dim: self.dim,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            matrix: &self.matrix * s,
        }
    }

    pub fn apply(&self, v: &VectorizedOperator) -> VectorizedOperator {
        assert_eq!(v.dim, self.dim, "superoperator/operator dimension mismatch");
        let n2 = self.dim * self.dim;
        let entries = (0..n2)
            .map(|r| (0..n2).map(|c| self.matrix[(r, c)] * v.entries[c]).sum())
            .collect();
        VectorizedOperator {
            dim: self.dim,
            entries,
        }
    }

    /// Maximum entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.matrix.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `⟨⟨1| S`, the trace functional applied from the left (a row of length `N²`).
    pub fn trace_row(&self) -> Vec<C64> {
        let n = self.dim;
        let n2 = n * n;
        (0..n2)
            .map(|c| (0..n).map(|k| self.matrix[(k * n + k, c)]).sum())
            .collect()
    }

    /// `‖⟨⟨1|S − ⟨⟨1|‖∞`; zero for a trace-preserving map.
    pub fn trace_preservation_error(&self) -> f64 {
        let one = trace_functional(self.dim);
        self.trace_row()
            .iter()
            .zip(&one)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).norm()))
    }

    /// `‖⟨⟨1|S‖∞`; zero for a trace-annihilating map (generators, self-energies).
    pub fn trace_annihilation_error(&self) -> f64 {
        self.trace_row().iter().fold(0.0, |acc, a| acc.max(a.norm()))
    }
}

impl Mul for &SuperOp {
    type Output = SuperOp;
    fn mul(self, rhs: &SuperOp) -> SuperOp {
        assert_eq!(self.dim, rhs.dim, "superoperator dimension mismatch");
        SuperOp {
            dim: self.dim,
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}

impl Add for &SuperOp {
    type Output = SuperOp;
    fn add(self, rhs: &SuperOp) -> SuperOp {
        assert_eq!(self.dim, rhs.dim, "superoperator dimension mismatch");
        SuperOp {
            dim: self.dim,
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl Sub for &SuperOp {
    type Output = SuperOp;
    fn sub(self, rhs: &SuperOp) -> SuperOp {
        assert_eq!(self.dim, rhs.dim, "superoperator dimension mismatch");
        SuperOp {
            dim: self.dim,
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

/// Vectorized identity `⟨⟨1|`: ones at indices `n·N + n`.
pub fn trace_functional(dim: usize) -> Vec<C64> {
    let mut row = vec![ZERO; dim * dim];
    for n in 0..dim {
        row[n * dim + n] = ONE;
    }
    row
}

pub fn vectorize(rho: &OperatorMatrix) -> VectorizedOperator {
    let n = rho.dim();
    let mut entries = Vec::with_capacity(n * n);
    for row in 0..n {
        for col in 0..n {
            entries.push(rho.0[(row, col)]);
        }
    }
    VectorizedOperator { dim: n, entries }
}

pub fn unvectorize(v: &VectorizedOperator) -> OperatorMatrix {
    OperatorMatrix(DMatrix::from_row_slice(v.dim, v.dim, &v.entries))
}

/// Superoperator of `ρ ↦ A ρ`, i.e. `A ⊗ 1`.
pub fn left_mult(a: &OperatorMatrix) -> SuperOp {
    let n = a.dim();
    SuperOp {
        dim: n,
        matrix: a.0.kronecker(&DMatrix::<C64>::identity(n, n)),
    }
}

/// Superoperator of `ρ ↦ ρ B`, i.e. `1 ⊗ Bᵀ`.
pub fn right_mult(b: &OperatorMatrix) -> SuperOp {
    let n = b.dim();
    SuperOp {
        dim: n,
        matrix: DMatrix::<C64>::identity(n, n).kronecker(&b.0.transpose()),
    }
}

/// Whether a contour superoperator annihilates or creates a particle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Annihilate,
    Create,
}

/// Matrix of `D_±` / `D_±†` for the annihilation operator `d` of one flavor.
///
/// On the `+` branch the operator acts from the left (`d ⊗ 1`, `d† ⊗ 1`), on
/// the `−` branch from the right (`1 ⊗ dᵀ`, `1 ⊗ d*`).
pub fn contour_superop(kind: OpKind, branch: Branch, d: &OperatorMatrix) -> SuperOp {
    match (kind, branch) {
        (OpKind::Annihilate, Branch::Plus) => left_mult(d),
        (OpKind::Create, Branch::Plus) => left_mult(&d.dagger()),
        (OpKind::Annihilate, Branch::Minus) => right_mult(d),
        (OpKind::Create, Branch::Minus) => right_mult(&d.dagger()),
    }
}

/// A dissipation channel `γ (L ρ L† − ½{L†L, ρ})`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpOperator {
    pub operator: OperatorMatrix,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladModel {
    pub hamiltonian: OperatorMatrix,
    pub jumps: Vec<JumpOperator>,
}

impl LindbladModel {
    pub fn new(hamiltonian: OperatorMatrix, jumps: Vec<JumpOperator>) -> Result<Self> {
        let model = Self { hamiltonian, jumps };
        model.validate()?;
        Ok(model)
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.hamiltonian.dim();
        if !self.hamiltonian.is_hermitian(1e-12) {
            return Err(NcaError::Model("hamiltonian is not hermitian".into()));
        }
        for (k, jump) in self.jumps.iter().enumerate() {
            if !(jump.rate >= 0.0) || !jump.rate.is_finite() {
                return Err(NcaError::Model(format!(
                    "jump {k} has invalid rate {}",
                    jump.rate
                )));
            }
            if jump.operator.dim() != n {
                return Err(NcaError::Model(format!(
                    "jump {k} has dimension {} but the hamiltonian has {n}",
                    jump.operator.dim()
                )));
            }
        }
        Ok(())
    }
}

/// Liouvillian `𝓛` of a Lindblad master equation.
pub fn build_liouvillian(model: &LindbladModel) -> Result<SuperOp> {
    model.validate()?;
    let h = &model.hamiltonian;
    let mut l = (&left_mult(h) - &right_mult(h)).scale(-I);
    for jump in &model.jumps {
        if jump.rate == 0.0 {
            continue;
        }
        let op = &jump.operator;
        let op_dag = op.dagger();
        let ldl = &op_dag * op;
        let sandwich = &left_mult(op) * &right_mult(&op_dag);
        let anti = &left_mult(&ldl) + &right_mult(&ldl);
        let dissipator = &sandwich - &anti.scale(C64::new(0.5, 0.0));
        l = &l + &dissipator.scale(C64::new(jump.rate, 0.0));
    }
    Ok(l)
}

/// `exp(S·t)` for `t ≥ 0`.
pub fn matrix_exp(s: &SuperOp, t: f64) -> Result<SuperOp> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(NcaError::Domain(format!(
            "matrix exponential needs a finite t >= 0, got {t}"
        )));
    }
    if t == 0.0 {
        return Ok(SuperOp::identity(s.dim));
    }
    let scaled = &s.matrix * C64::new(t, 0.0);
    Ok(SuperOp {
        dim: s.dim,
        matrix: scaled.exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn d2() -> OperatorMatrix {
        OperatorMatrix::from_row_major(2, &[ZERO, ONE, ZERO, ZERO]).unwrap()
    }

    #[test]
    fn vectorize_uses_row_major_index() {
        let rho = OperatorMatrix::from_row_major(2, &[c(1.0, 0.0), c(2.0, 1.0), c(3.0, -1.0), c(4.0, 0.0)])
            .unwrap();
        let v = vectorize(&rho);
        assert_eq!(v.entries(), &[c(1.0, 0.0), c(2.0, 1.0), c(3.0, -1.0), c(4.0, 0.0)]);
        assert_eq!(vectorize(&OperatorMatrix::identity(2)).entries(), &[ONE, ZERO, ZERO, ONE]);
        assert_eq!(
            vectorize(&OperatorMatrix::basis_projector(2, 0)).entries(),
            &[ONE, ZERO, ZERO, ZERO]
        );
    }

    #[test]
    fn unvectorize_basis_vectors() {
        let v = VectorizedOperator::new(vec![ZERO, ONE, ZERO, ZERO]).unwrap();
        assert_eq!(unvectorize(&v), d2());
        let v = VectorizedOperator::new(vec![ONE, ZERO, ZERO, ZERO]).unwrap();
        assert_eq!(unvectorize(&v), OperatorMatrix::basis_projector(2, 0));
    }

    #[test]
    fn unvectorize_rejects_non_square_length() {
        assert!(matches!(
            VectorizedOperator::new(vec![ZERO; 3]),
            Err(NcaError::Dimension(_))
        ));
        assert!(VectorizedOperator::new(vec![]).is_err());
    }

    #[test]
    fn left_mult_identity_is_identity() {
        assert_eq!(left_mult(&OperatorMatrix::identity(3)), SuperOp::identity(3));
        assert_eq!(right_mult(&OperatorMatrix::identity(3)), SuperOp::identity(3));
    }

    #[test]
    fn contour_superops_match_kronecker_table() {
        let d = d2();
        let id = DMatrix::<C64>::identity(2, 2);
        let plus = contour_superop(OpKind::Annihilate, Branch::Plus, &d);
        assert_eq!(plus.as_matrix(), &d.as_matrix().kronecker(&id));
        let minus_dag = contour_superop(OpKind::Create, Branch::Minus, &d);
        assert_eq!(minus_dag.as_matrix(), &id.kronecker(&d.as_matrix().conjugate()));
        for branch in [Branch::Plus, Branch::Minus] {
            let ann = contour_superop(OpKind::Annihilate, branch, &d);
            let cre = contour_superop(OpKind::Create, branch, &d);
            assert_eq!(ann.dagger(), cre);
        }
    }

    #[test]
    fn negative_rate_is_rejected() {
        let model = LindbladModel {
            hamiltonian: OperatorMatrix::zeros(2),
            jumps: vec![JumpOperator {
                operator: d2(),
                rate: -0.1,
            }],
        };
        assert!(matches!(build_liouvillian(&model), Err(NcaError::Model(_))));
    }

    #[test]
    fn empty_model_gives_zero_liouvillian() {
        let model = LindbladModel::new(OperatorMatrix::zeros(2), vec![]).unwrap();
        let l = build_liouvillian(&model).unwrap();
        assert_eq!(l.max_abs(), 0.0);
    }

    #[test]
    fn matrix_exp_domain() {
        let l = SuperOp::identity(2);
        assert!(matches!(matrix_exp(&l, -1.0), Err(NcaError::Domain(_))));
        assert_eq!(matrix_exp(&l, 0.0).unwrap(), SuperOp::identity(2));
        let z = SuperOp::zeros(2);
        assert_eq!(matrix_exp(&z, 3.0).unwrap(), SuperOp::identity(2));
    }
}
