//! Non-crossing approximation for the dressed evolution superoperator.
//!
//! The dressed propagator solves
//!
//! ```text
//! ∂ₜ V(t) = 𝓛 V(t) + ∫₀ᵗ dt₁ Σ(t − t₁) V(t₁),     V(0) = 1
//! ```
//!
//! where the NCA self-energy at lag `τ` is the first-order hybridization
//! diagram with the bare propagator replaced by the dressed `V(τ)`. Both
//! `V` and `Σ` depend on a single time difference. Time derivatives use a
//! forward difference and the memory integral the trapezoid rule, so each
//! step is explicit: `Σ(t_m)` is built from the already known `V(t_m)`.

use nalgebra::DMatrix;

use crate::error::{NcaError, Result};
use crate::hybridization::{grid_lag, Branch, EqualTimeSide, HybridizationTable, Statistics};
use crate::liouville::{contour_superop, matrix_exp, OpKind, OperatorMatrix, SuperOp, C64, I, ZERO};

/// Entries larger than this abort the solve.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// One matrix element `Δ_{row,col}` of the hybridization, coupling `d†_row`
/// to `d_col`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub row: usize,
    pub col: usize,
    pub table: HybridizationTable,
}

#[derive(Debug, Clone)]
struct FlavorOps {
    // indexed by branch: [plus, minus]
    ann: [SuperOp; 2],
    cre: [SuperOp; 2],
}

fn branch_index(b: Branch) -> usize {
    match b {
        Branch::Plus => 0,
        Branch::Minus => 1,
    }
}

/// Everything needed to integrate the Dyson equation on a uniform grid.
#[derive(Debug, Clone)]
pub struct NcaProblem {
    liouvillian: SuperOp,
    flavors: Vec<OperatorMatrix>,
    couplings: Vec<Coupling>,
    statistics: Statistics,
    dt: f64,
    steps: usize,
    ops: Vec<FlavorOps>,
}

impl NcaProblem {
    /// `dt` must equal the step of every coupling table exactly and `steps`
    /// may not exceed their range.
    pub fn new(
        liouvillian: SuperOp,
        flavors: Vec<OperatorMatrix>,
        couplings: Vec<Coupling>,
        dt: f64,
        steps: usize,
    ) -> Result<Self> {
        let n = liouvillian.dim();
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(NcaError::Domain(format!("dt must be > 0, got {dt}")));
        }
        for (k, d) in flavors.iter().enumerate() {
            if d.dim() != n {
                return Err(NcaError::Dimension(format!(
                    "flavor {k} has dimension {} but the liouvillian acts on dimension {n}",
                    d.dim()
                )));
            }
        }
        for c in &couplings {
            if c.row >= flavors.len() || c.col >= flavors.len() {
                return Err(NcaError::Model(format!(
                    "coupling ({}, {}) refers to a missing flavor ({} defined)",
                    c.row,
                    c.col,
                    flavors.len()
                )));
            }
            if c.table.dt() != dt {
                return Err(NcaError::GridLayout(format!(
                    "hybridization step {} differs from the solver step {dt}",
                    c.table.dt()
                )));
            }
            if c.table.steps() < steps {
                return Err(NcaError::GridLayout(format!(
                    "hybridization table covers {} steps, solver needs {steps}",
                    c.table.steps()
                )));
            }
            if c.table.statistics() != Statistics::Fermion {
                return Err(NcaError::Model("only fermionic baths are supported".into()));
            }
        }
        let statistics = Statistics::Fermion;
        let ops = flavors
            .iter()
            .map(|d| FlavorOps {
                ann: Branch::BOTH.map(|b| contour_superop(OpKind::Annihilate, b, d)),
                cre: Branch::BOTH.map(|b| contour_superop(OpKind::Create, b, d)),
            })
            .collect();
        Ok(Self {
            liouvillian,
            flavors,
            couplings,
            statistics,
            dt,
            steps,
            ops,
        })
    }

    /// Single fermionic mode `d` with hybridization `table`.
    pub fn single_mode(
        liouvillian: SuperOp,
        d: OperatorMatrix,
        table: HybridizationTable,
        steps: usize,
    ) -> Result<Self> {
        let dt = table.dt();
        Self::new(
            liouvillian,
            vec![d],
            vec![Coupling { row: 0, col: 0, table }],
            dt,
            steps,
        )
    }

    pub fn liouvillian(&self) -> &SuperOp {
        &self.liouvillian
    }

    pub fn flavors(&self) -> &[OperatorMatrix] {
        &self.flavors
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    pub fn dim(&self) -> usize {
        self.liouvillian.dim()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn xi(&self) -> f64 {
        self.statistics.xi()
    }

    /// Same problem integrated over fewer steps.
    pub fn truncated(&self, steps: usize) -> Self {
        Self {
            steps: steps.min(self.steps),
            ..self.clone()
        }
    }

    /// Returns the two contributions to `Σ(τ_j)` separately: the hole
    /// propagation term (`D† V D`, hybridization at `+τ`) and the particle
    /// propagation term (`ξ D V D†`, hybridization at `−τ`), each already
    /// carrying the contour prefactor `−α^{(1+ξ)/2} β i`.
    pub fn self_energy_terms(&self, v: &SuperOp, lag: usize) -> Result<(SuperOp, SuperOp)> {
        let n = self.dim();
        if v.dim() != n {
            return Err(NcaError::Dimension(format!(
                "propagator has dimension {} but the problem has {n}",
                v.dim()
            )));
        }
        let xi = self.xi();
        let alpha_power = (1.0 + xi) / 2.0;
        let j = lag as i64;
        let mut hole = DMatrix::<C64>::zeros(n * n, n * n);
        let mut particle = DMatrix::<C64>::zeros(n * n, n * n);

        for c in &self.couplings {
            let row = &self.ops[c.row];
            let col = &self.ops[c.col];
            for beta in Branch::BOTH {
                let b = branch_index(beta);
                // D†_{β,row} V and D_{β,col} V
                let cre_v = row.cre[b].as_matrix() * v.as_matrix();
                let ann_v = col.ann[b].as_matrix() * v.as_matrix();
                for alpha in Branch::BOTH {
                    let a = branch_index(alpha);
                    let pref = -I * (alpha.sign().powf(alpha_power) * beta.sign());
                    let d_fwd =
                        c.table.component_at_lag(beta, alpha, j, EqualTimeSide::FirstLater)?;
                    // Δ(t2, t1) on the causal side t1 → t2⁺
                    let d_bwd =
                        c.table.component_at_lag(alpha, beta, -j, EqualTimeSide::FirstEarlier)?;
                    if d_fwd != ZERO {
                        hole += (&cre_v * col.ann[a].as_matrix()) * (pref * d_fwd);
                    }
                    if d_bwd != ZERO {
                        particle += (&ann_v * row.cre[a].as_matrix()) * (pref * xi * d_bwd);
                    }
                }
            }
        }
        Ok((
            SuperOp::from_matrix_unchecked(n, hole),
            SuperOp::from_matrix_unchecked(n, particle),
        ))
    }

    /// `Σ(τ_j)` from the propagator `V(τ_j)`.
    pub fn self_energy_at_lag(&self, v: &SuperOp, lag: usize) -> Result<SuperOp> {
        let (hole, particle) = self.self_energy_terms(v, lag)?;
        Ok(&hole + &particle)
    }
}

/// `Σ(t1, t2)` for `t1 ≥ t2` given `Vt = V(t1 − t2)`.
pub fn nca_self_energy(vt: &SuperOp, t1: f64, t2: f64, prob: &NcaProblem) -> Result<SuperOp> {
    let j = grid_lag(t1 - t2, prob.dt)?;
    if j < 0 {
        return Err(NcaError::Domain(format!(
            "self-energy needs t1 >= t2, got t1 = {t1}, t2 = {t2}"
        )));
    }
    prob.self_energy_at_lag(vt, j as usize)
}

/// Dressed propagator and self-energy on `t_j = j·dt`, `j = 0..=L`.
#[derive(Debug, Clone)]
pub struct PropagatorHistory {
    pub dt: f64,
    pub steps: usize,
    pub v: Vec<SuperOp>,
    pub sigma: Vec<SuperOp>,
}

impl PropagatorHistory {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.v.len()).map(move |j| j as f64 * self.dt)
    }

    pub fn dim(&self) -> usize {
        self.v[0].dim()
    }

    /// `max_j ‖⟨⟨1|V_j − ⟨⟨1|‖∞`.
    pub fn max_trace_error(&self) -> f64 {
        self.v
            .iter()
            .map(SuperOp::trace_preservation_error)
            .fold(0.0, f64::max)
    }
}

/// `out += a · b · scale` on column-major `n×n` slices.
fn mul_acc(n: usize, a: &[C64], b: &[C64], scale: f64, out: &mut [C64]) {
    for k in 0..n {
        let bcol = &b[k * n..(k + 1) * n];
        let ocol = &mut out[k * n..(k + 1) * n];
        for (j, &bjk) in bcol.iter().enumerate() {
            if bjk == ZERO {
                continue;
            }
            let s = bjk * scale;
            let acol = &a[j * n..(j + 1) * n];
            for (o, &aij) in ocol.iter_mut().zip(acol) {
                *o += aij * s;
            }
        }
    }
}

/// Trapezoid rule for `∫₀^{t_m} Σ(t_m − t₁) V(t₁) dt₁`.
pub(crate) fn convolve(sigma: &[SuperOp], v: &[SuperOp], m: usize, dt: f64) -> SuperOp {
    let n = v[0].dim();
    let n2 = n * n;
    let mut acc = DMatrix::<C64>::zeros(n2, n2);
    if m == 0 {
        return SuperOp::from_matrix_unchecked(n, acc);
    }
    let out = acc.as_mut_slice();
    let half = 0.5 * dt;
    mul_acc(n2, sigma[0].as_matrix().as_slice(), v[m].as_matrix().as_slice(), half, out);
    mul_acc(n2, sigma[m].as_matrix().as_slice(), v[0].as_matrix().as_slice(), half, out);
    for l in 1..m {
        mul_acc(
            n2,
            sigma[m - l].as_matrix().as_slice(),
            v[l].as_matrix().as_slice(),
            dt,
            out,
        );
    }
    SuperOp::from_matrix_unchecked(n, acc)
}

/// `Δt/2 · Σ_{l<m} [Σ((m−l−1)Δt) V((l+1)Δt) + Σ((m−l)Δt) V(lΔt)]`.
pub fn trapezoid_convolution(hist: &PropagatorHistory, m: usize) -> Result<SuperOp> {
    if m >= hist.v.len() || m >= hist.sigma.len() {
        return Err(NcaError::State(format!(
            "convolution at step {m} needs V and Σ up to {m}, history has {} and {}",
            hist.v.len(),
            hist.sigma.len()
        )));
    }
    Ok(convolve(&hist.sigma, &hist.v, m, hist.dt))
}

fn check_finite(s: &SuperOp, step: usize) -> Result<()> {
    if s
        .as_matrix()
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite() || z.norm() > DIVERGENCE_THRESHOLD)
    {
        return Err(NcaError::Divergence { step });
    }
    Ok(())
}

/// Integrates the Dyson equation with forward Euler steps.
pub fn solve_dyson(prob: &NcaProblem) -> Result<PropagatorHistory> {
    let n = prob.dim();
    let dt = prob.dt;
    let steps = prob.steps;
    let mut v = Vec::with_capacity(steps + 1);
    let mut sigma = Vec::with_capacity(steps + 1);
    v.push(SuperOp::identity(n));

    let liou = prob.liouvillian.as_matrix();
    for m in 0..steps {
        let s = prob.self_energy_at_lag(&v[m], m)?;
        check_finite(&s, m)?;
        sigma.push(s);
        let memory = convolve(&sigma, &v, m, dt);
        let deriv = liou * v[m].as_matrix() + memory.as_matrix();
        let next = v[m].as_matrix() + deriv * C64::new(dt, 0.0);
        let next = SuperOp::from_matrix_unchecked(n, next);
        check_finite(&next, m + 1)?;
        v.push(next);
    }
    let s = prob.self_energy_at_lag(&v[steps], steps)?;
    check_finite(&s, steps)?;
    sigma.push(s);

    Ok(PropagatorHistory {
        dt,
        steps,
        v,
        sigma,
    })
}

/// Bare propagators `V₀(j·dt) = exp(𝓛 j dt)` for `j = 0..=steps`.
pub fn bare_propagators(liouvillian: &SuperOp, dt: f64, steps: usize) -> Result<Vec<SuperOp>> {
    (0..=steps)
        .map(|j| matrix_exp(liouvillian, j as f64 * dt))
        .collect()
}

/// Largest entry of `V(t) − [V₀(t) + ∫₀ᵗdt₁ ∫₀^{t₁}dt₂ V₀(t−t₁) Σ(t₁−t₂) V(t₂)]`
/// over the grid, with both integrals done by the trapezoid rule.
///
/// The integral form of the Dyson equation is satisfied by the exact
/// solution, so this measures the time-discretization error of the stepper.
pub fn dyson_residual(hist: &PropagatorHistory, prob: &NcaProblem) -> Result<f64> {
    let steps = hist.v.len() - 1;
    let n = hist.dim();
    let n2 = n * n;
    let v0 = bare_propagators(&prob.liouvillian, hist.dt, steps)?;
    let inner: Vec<SuperOp> = (0..=steps)
        .map(|k| trapezoid_convolution(hist, k))
        .collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for m in 0..=steps {
        let mut acc = DMatrix::<C64>::zeros(n2, n2);
        if m > 0 {
            let out = acc.as_mut_slice();
            for k in 0..=m {
                let w = if k == 0 || k == m { 0.5 * hist.dt } else { hist.dt };
                mul_acc(
                    n2,
                    v0[m - k].as_matrix().as_slice(),
                    inner[k].as_matrix().as_slice(),
                    w,
                    out,
                );
            }
        }
        let diff = hist.v[m].as_matrix() - v0[m].as_matrix() - acc;
        let r = diff.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        worst = worst.max(r);
    }
    Ok(worst)
}
