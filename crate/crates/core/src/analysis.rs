//! Observables and diagnostics of a solved propagator history.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};

use crate::error::{NcaError, Result};
use crate::liouville::{trace_functional, unvectorize, vectorize, OperatorMatrix, SuperOp, C64, ZERO};
use crate::model::{annihilation, Simulation};
use crate::nca::{solve_dyson, PropagatorHistory};

/// Eigenvalues and right eigenvectors (unit 2-norm columns) of a general
/// complex square matrix.
pub fn eigen_decomposition(m: &DMatrix<C64>) -> Option<(Vec<C64>, DMatrix<C64>)> {
    let n = m.nrows();
    let schur = Schur::try_new(m.clone(), 1e-15, 10_000)?;
    let (q, t) = schur.unpack();
    let scale = t.iter().fold(0.0f64, |a, z| a.max(z.norm())).max(f64::MIN_POSITIVE);
    let small = scale * f64::EPSILON;

    let values: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
    let mut vectors = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        let lambda = values[k];
        let mut y = DVector::<C64>::zeros(n);
        y[k] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut rhs = ZERO;
            for j in i + 1..=k {
                rhs -= t[(i, j)] * y[j];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < small {
                if rhs.norm() < small {
                    continue;
                }
                denom = C64::new(small, 0.0);
            }
            y[i] = rhs / denom;
        }
        let v = &q * y;
        let norm = v.norm();
        vectors.set_column(k, &(v / C64::new(norm, 0.0)));
    }
    Some((values, vectors))
}

/// Per-time spectrum of `V(t_j)`.
#[derive(Debug, Clone)]
pub struct SpectrumSeries {
    pub times: Vec<f64>,
    /// Index 0 is the eigenvalue closest to 1; the rest by descending modulus.
    pub eigenvalues: Vec<Vec<C64>>,
    /// `|λ₀ − 1|` per time.
    pub unit_eig_err: Vec<f64>,
    /// `‖⟨⟨1|V − ⟨⟨1|‖∞` per time.
    pub left_trace_err: Vec<f64>,
    /// Largest `|tr v_i|` of a unit-normalized right eigenvector with `|λ_i − 1| > 1e-6`.
    pub max_nonunit_trace: f64,
}

impl SpectrumSeries {
    pub fn max_unit_eig_err(&self) -> f64 {
        self.unit_eig_err.iter().copied().fold(0.0, f64::max)
    }

    /// Magnitudes `|λ_i(t_j)|`.
    pub fn magnitudes(&self) -> Vec<Vec<f64>> {
        self.eigenvalues
            .iter()
            .map(|row| row.iter().map(|z| z.norm()).collect())
            .collect()
    }
}

/// Tolerance separating the unit eigenvalue from the others.
pub const UNIT_EIGENVALUE_TOL: f64 = 1e-6;

pub fn propagator_spectrum(hist: &PropagatorHistory) -> Result<SpectrumSeries> {
    let n = hist.dim();
    let one = trace_functional(n);
    let mut out = SpectrumSeries {
        times: hist.times().collect(),
        eigenvalues: Vec::with_capacity(hist.v.len()),
        unit_eig_err: Vec::with_capacity(hist.v.len()),
        left_trace_err: Vec::with_capacity(hist.v.len()),
        max_nonunit_trace: 0.0,
    };
    for (step, v) in hist.v.iter().enumerate() {
        let (mut values, vectors) =
            eigen_decomposition(v.as_matrix()).ok_or_else(|| NcaError::Numerics {
                step,
                reason: "Schur decomposition did not converge".into(),
            })?;
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(NcaError::Numerics {
                step,
                reason: "non-finite eigenvalue".into(),
            });
        }
        for (k, lambda) in values.iter().enumerate() {
            if (lambda - 1.0).norm() > UNIT_EIGENVALUE_TOL {
                let tr: C64 = (0..n * n).map(|r| one[r] * vectors[(r, k)]).sum();
                out.max_nonunit_trace = out.max_nonunit_trace.max(tr.norm());
            }
        }
        let k0 = values
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - 1.0).norm().total_cmp(&(b.1 - 1.0).norm()))
            .map(|(k, _)| k)
            .unwrap();
        let lambda0 = values.remove(k0);
        values.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
        values.insert(0, lambda0);
        out.unit_eig_err.push((lambda0 - 1.0).norm());
        out.left_trace_err.push(v.trace_preservation_error());
        out.eigenvalues.push(values);
    }
    Ok(out)
}

/// `ρ(t_j) = V(t_j) ρ₀` for every grid point.
pub fn evolve_state(hist: &PropagatorHistory, rho0: &OperatorMatrix) -> Result<Vec<OperatorMatrix>> {
    check_density_matrix(rho0, hist.dim())?;
    let v0 = vectorize(rho0);
    Ok(hist.v.iter().map(|v| unvectorize(&v.apply(&v0))).collect())
}

/// Hermitian, unit trace, matching dimension.
pub fn check_density_matrix(rho: &OperatorMatrix, dim: usize) -> Result<()> {
    if rho.dim() != dim {
        return Err(NcaError::State(format!(
            "initial state has dimension {} but the propagator acts on {dim}",
            rho.dim()
        )));
    }
    if rho.hermiticity_error() > 1e-12 * rho.max_abs().max(1.0) {
        return Err(NcaError::State("initial state is not hermitian".into()));
    }
    let tr = rho.trace();
    if (tr - 1.0).norm() > 1e-9 {
        return Err(NcaError::State(format!("initial state has trace {tr}, expected 1")));
    }
    Ok(())
}

/// `tr(d†d ρ)` as `(real part, |imaginary part|)`.
pub fn occupation_with_residual(rho: &OperatorMatrix, d: &OperatorMatrix) -> (f64, f64) {
    let n = &d.dagger() * d;
    let value = (&n * rho).trace();
    (value.re, value.im.abs())
}

/// `Re tr(d†d ρ)`.
pub fn occupation(rho: &OperatorMatrix, d: &OperatorMatrix) -> f64 {
    occupation_with_residual(rho, d).0
}

/// A real observable sampled on the time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub label: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn occupation_series(times: &[f64], states: &[OperatorMatrix], d: &OperatorMatrix) -> ObservableSeries {
    ObservableSeries {
        label: "n".into(),
        times: times.to_vec(),
        values: states.iter().map(|rho| occupation(rho, d)).collect(),
    }
}

/// Minimum eigenvalue of the Hermitian part of each state.
///
/// Negative values flag positivity violations; they are reported, not
/// treated as errors.
pub fn positivity_monitor(states: &[OperatorMatrix]) -> Vec<f64> {
    states
        .iter()
        .map(|rho| {
            let m = rho.as_matrix();
            let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
            SymmetricEigen::new(herm)
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Largest `max|ρ − ρ†|` when each of `inputs` is propagated by `v`.
pub fn hermiticity_error(v: &SuperOp, inputs: &[OperatorMatrix]) -> f64 {
    inputs
        .iter()
        .map(|rho| unvectorize(&v.apply(&vectorize(rho))).hermiticity_error())
        .fold(0.0, f64::max)
}

/// Window over which stationarity is judged, as a fraction of the run.
pub const STATIONARY_WINDOW: f64 = 0.1;
/// Maximum allowed occupation drift inside the window.
pub const STATIONARY_TOL: f64 = 1e-3;

/// Whether `values` stayed within [`STATIONARY_TOL`] of its last entry over
/// the final [`STATIONARY_WINDOW`] of the run.
pub fn is_stationary(values: &[f64]) -> bool {
    let Some(&last) = values.last() else {
        return false;
    };
    let window = ((values.len() - 1) as f64 * STATIONARY_WINDOW).round() as usize;
    values[values.len() - 1 - window..]
        .iter()
        .all(|v| (v - last).abs() < STATIONARY_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub eps0: f64,
    pub n_final: f64,
    pub stationary: bool,
}

/// Final occupation for each level energy in `eps_values`.
pub fn steady_state_scan(base: &Simulation, eps_values: &[f64]) -> Result<Vec<ScanPoint>> {
    let d = annihilation();
    eps_values
        .iter()
        .map(|&eps0| {
            let mut sim = base.clone();
            sim.level.eps0 = eps0;
            let hist = solve_dyson(&sim.problem()?)?;
            let states = evolve_state(&hist, &sim.rho0)?;
            let values: Vec<f64> = states.iter().map(|rho| occupation(rho, &d)).collect();
            Ok(ScanPoint {
                eps0,
                n_final: *values.last().unwrap(),
                stationary: is_stationary(&values),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eigen_decomposition_of_triangular_and_defective() {
        let m = DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(3.0, 1.0)]);
        let (vals, vecs) = eigen_decomposition(&m).unwrap();
        for (k, val) in vals.iter().enumerate() {
            let v = vecs.column(k);
            let r = &m * v - v * *val;
            assert!(r.norm() < 1e-12);
        }
        let id = DMatrix::<C64>::identity(3, 3);
        let (vals, _) = eigen_decomposition(&id).unwrap();
        assert!(vals.iter().all(|z| (z - 1.0).norm() < 1e-15));
    }

    #[test]
    fn occupation_of_basis_states() {
        let d = annihilation();
        assert_eq!(occupation(&OperatorMatrix::basis_projector(2, 0), &d), 0.0);
        assert_eq!(occupation(&OperatorMatrix::basis_projector(2, 1), &d), 1.0);
        let mixed = OperatorMatrix::identity(2).scale(c(0.5, 0.0));
        assert_eq!(occupation(&mixed, &d), 0.5);
    }

    #[test]
    fn positivity_of_simple_states() {
        let mixed = OperatorMatrix::identity(2).scale(c(0.5, 0.0));
        let pure = OperatorMatrix::basis_projector(2, 0);
        let mins = positivity_monitor(&[mixed, pure]);
        assert!((mins[0] - 0.5).abs() < 1e-15);
        assert!(mins[1].abs() < 1e-15);
    }

    #[test]
    fn density_matrix_checks() {
        let bad_trace = OperatorMatrix::identity(2);
        assert!(matches!(check_density_matrix(&bad_trace, 2), Err(NcaError::State(_))));
        let non_herm =
            OperatorMatrix::from_row_major(2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(check_density_matrix(&non_herm, 2).is_err());
        assert!(check_density_matrix(&OperatorMatrix::basis_projector(2, 1), 2).is_ok());
        assert!(check_density_matrix(&OperatorMatrix::basis_projector(3, 1), 2).is_err());
    }

    #[test]
    fn stationarity_window() {
        let mut v = vec![0.0; 100];
        v.extend(vec![0.5; 101]);
        assert!(is_stationary(&v));
        let ramp: Vec<f64> = (0..=200).map(|k| k as f64 * 1e-3).collect();
        assert!(!is_stationary(&ramp));
    }
}
