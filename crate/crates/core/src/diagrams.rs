//! Direct evaluation of the first-order (one hybridization line) term of the
//! bare hybridization expansion.
//!
//! The term is integrated over the full square `[0,t]²` of the two vertex
//! times. Each point gets its sign from contour ordering (`T_C`) and its
//! operator order from plain time ordering (`T_F`), with bare propagators
//! `V₀ = exp(𝓛τ)` on every leg. Nothing here goes through the NCA
//! self-energy, so agreement with the first Dyson iterate
//! `∬ V₀ Σ⁽⁰⁾ V₀` checks every sign and branch convention used there.

use nalgebra::DMatrix;

use crate::error::{NcaError, Result};
use crate::hybridization::{grid_lag, Branch, EqualTimeSide};
use crate::liouville::{contour_superop, OpKind, SuperOp, C64, I};
use crate::nca::{bare_propagators, convolve, NcaProblem};

/// Pass threshold of the oracle comparison (max relative deviation).
pub const ORACLE_TOL: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct BareTermConfig {
    pub prob: NcaProblem,
    pub quad_dt: f64,
    stride: usize,
}

impl BareTermConfig {
    /// `quad_dt` must be a whole multiple of the problem's hybridization step.
    pub fn new(prob: NcaProblem, quad_dt: f64) -> Result<Self> {
        if !(quad_dt > 0.0) {
            return Err(NcaError::Domain(format!("quad_dt must be > 0, got {quad_dt}")));
        }
        let stride = grid_lag(quad_dt, prob.dt())?;
        if stride < 1 {
            return Err(NcaError::GridLayout(format!(
                "quad_dt {quad_dt} is finer than the hybridization step {}",
                prob.dt()
            )));
        }
        Ok(Self {
            prob,
            quad_dt,
            stride: stride as usize,
        })
    }

    fn nodes(&self, t: f64) -> Result<usize> {
        let n = grid_lag(t, self.quad_dt)?;
        if n < 0 {
            return Err(NcaError::Domain(format!("t must be >= 0, got {t}")));
        }
        Ok(n as usize)
    }
}

/// Nesting order of the two quadrature loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopOrder {
    /// Outer loop over the creation-vertex time.
    CreatorOuter,
    /// Outer loop over the annihilation-vertex time.
    AnnihilatorOuter,
}

// Trapezoid weight (in units of h²) of node (hi, lo), hi >= lo, on the
// triangle {lo <= hi} of [0, n]², averaged over both nesting orders.
fn triangle_weight(hi: usize, lo: usize, n: usize) -> f64 {
    let end = |i: usize, a: usize, b: usize| if i == a || i == b { 0.5 } else { 1.0 };
    // outer over hi, inner lo ∈ [0, hi]
    let wa = if hi == 0 { 0.0 } else { end(hi, 0, n) * end(lo, 0, hi) };
    // outer over lo, inner hi ∈ [lo, n]
    let wb = if lo == n { 0.0 } else { end(lo, 0, n) * end(hi, lo, n) };
    0.5 * (wa + wb)
}

/// Whether the first operator is later on the contour than the second.
fn contour_later(b1: Branch, b2: Branch, first_later_in_time: bool) -> bool {
    match (b1, b2) {
        (Branch::Plus, Branch::Plus) => first_later_in_time,
        (Branch::Minus, Branch::Minus) => !first_later_in_time,
        (Branch::Minus, Branch::Plus) => true,
        (Branch::Plus, Branch::Minus) => false,
    }
}

/// First-order correction `V⁽¹⁾(t, 0)`.
pub fn bare_first_order(t: f64, cfg: &BareTermConfig) -> Result<SuperOp> {
    bare_first_order_ordered(t, cfg, LoopOrder::CreatorOuter)
}

pub fn bare_first_order_ordered(t: f64, cfg: &BareTermConfig, order: LoopOrder) -> Result<SuperOp> {
    let prob = &cfg.prob;
    let n = cfg.nodes(t)?;
    let dim = prob.dim();
    let h = cfg.quad_dt;
    let xi = prob.xi();
    let v0 = bare_propagators(prob.liouvillian(), h, n)?;
    let mut acc = DMatrix::<C64>::zeros(dim * dim, dim * dim);
    if n == 0 {
        return SuperOp::from_matrix(acc);
    }

    for c in prob.couplings() {
        let d_cre = &prob.flavors()[c.row];
        let d_ann = &prob.flavors()[c.col];
        for g1 in Branch::BOTH {
            let cre = contour_superop(OpKind::Create, g1, d_cre);
            for g2 in Branch::BOTH {
                let ann = contour_superop(OpKind::Annihilate, g2, d_ann);
                let branch_sign = g1.sign() * g2.sign();
                let mut visit = |i1: usize, i2: usize| -> Result<()> {
                    // i1: creation time, i2: annihilation time. On the
                    // diagonal both triangles contribute, each with its own
                    // one-sided limit.
                    let mut add = |cre_later: bool, w: f64| -> Result<()> {
                        if w == 0.0 {
                            return Ok(());
                        }
                        let side = if cre_later {
                            EqualTimeSide::FirstLater
                        } else {
                            EqualTimeSide::FirstEarlier
                        };
                        let lag = (i1 as i64 - i2 as i64) * cfg.stride as i64;
                        let delta = c.table.component_at_lag(g1, g2, lag, side)?;
                        if delta == C64::new(0.0, 0.0) {
                            return Ok(());
                        }
                        let sign = if contour_later(g1, g2, cre_later) { 1.0 } else { xi };
                        let (hi, lo, left, right) = if cre_later {
                            (i1, i2, &cre, &ann)
                        } else {
                            (i2, i1, &ann, &cre)
                        };
                        let chain = v0[n - hi].as_matrix()
                            * left.as_matrix()
                            * v0[hi - lo].as_matrix()
                            * right.as_matrix()
                            * v0[lo].as_matrix();
                        acc += chain * (-I * (branch_sign * sign * w * h * h) * delta);
                        Ok(())
                    };
                    if i1 >= i2 {
                        add(true, triangle_weight(i1, i2, n))?;
                    }
                    if i2 >= i1 {
                        add(false, triangle_weight(i2, i1, n))?;
                    }
                    Ok(())
                };
                match order {
                    LoopOrder::CreatorOuter => {
                        for i1 in 0..=n {
                            for i2 in 0..=n {
                                visit(i1, i2)?;
                            }
                        }
                    }
                    LoopOrder::AnnihilatorOuter => {
                        for i2 in 0..=n {
                            for i1 in 0..=n {
                                visit(i1, i2)?;
                            }
                        }
                    }
                }
            }
        }
    }
    SuperOp::from_matrix(acc)
}

/// `V₀(t) + V⁽¹⁾(t)`.
pub fn first_order_propagator(t: f64, cfg: &BareTermConfig) -> Result<SuperOp> {
    let n = cfg.nodes(t)?;
    let v0 = crate::liouville::matrix_exp(cfg.prob.liouvillian(), n as f64 * cfg.quad_dt)?;
    Ok(&v0 + &bare_first_order(t, cfg)?)
}

/// `∫₀ᵗdt₁ ∫₀^{t₁}dt₂ V₀(t−t₁) Σ⁽⁰⁾(t₁−t₂) V₀(t₂)` with the self-energy built
/// from the bare propagator, nested trapezoid rules at `quad_dt`.
pub fn first_dyson_iterate(t: f64, cfg: &BareTermConfig) -> Result<SuperOp> {
    first_dyson_iterate_with(t, cfg, |v, lag| cfg.prob.self_energy_at_lag(v, lag))
}

/// As [`first_dyson_iterate`] with a caller-supplied kernel `(V(τ), lag) ↦ Σ(τ)`;
/// `lag` is in units of the problem's grid step.
pub fn first_dyson_iterate_with<F>(t: f64, cfg: &BareTermConfig, kernel: F) -> Result<SuperOp>
where
    F: Fn(&SuperOp, usize) -> Result<SuperOp>,
{
    let n = cfg.nodes(t)?;
    let h = cfg.quad_dt;
    let dim = cfg.prob.dim();
    let v0 = bare_propagators(cfg.prob.liouvillian(), h, n)?;
    let sigma0: Vec<SuperOp> = v0
        .iter()
        .enumerate()
        .map(|(j, v)| kernel(v, j * cfg.stride))
        .collect::<Result<_>>()?;
    let mut acc = SuperOp::zeros(dim);
    for k in 0..=n {
        if n == 0 {
            break;
        }
        let w = if k == 0 || k == n { 0.5 * h } else { h };
        let inner = convolve(&sigma0, &v0, k, h);
        acc = &acc + &(&v0[n - k] * &inner).scale(C64::new(w, 0.0));
    }
    Ok(acc)
}

/// `max|A − B| / max|B|`, zero when both vanish.
pub fn max_relative_deviation(a: &SuperOp, b: &SuperOp) -> f64 {
    let diff = (a - b).max_abs();
    let scale = b.max_abs();
    if scale == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / scale
    }
}

#[derive(Debug, Clone)]
pub struct OracleComparison {
    pub bare: SuperOp,
    pub iterate: SuperOp,
    pub max_rel_dev: f64,
    pub pass: bool,
}

/// Compares [`bare_first_order`] with [`first_dyson_iterate`] at time `t`.
pub fn compare_first_order(t: f64, cfg: &BareTermConfig) -> Result<OracleComparison> {
    let bare = bare_first_order(t, cfg)?;
    let iterate = first_dyson_iterate(t, cfg)?;
    let max_rel_dev = max_relative_deviation(&bare, &iterate);
    Ok(OracleComparison {
        pass: max_rel_dev < ORACLE_TOL,
        bare,
        iterate,
        max_rel_dev,
    })
}
