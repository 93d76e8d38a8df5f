//! Spinless single-level fermionic impurity with Markovian loss, pump and
//! dephasing, optionally hybridized with a non-Markovian fermionic bath.
//!
//! Basis ordering is `|0⟩` (empty), `|1⟩` (occupied), so `d = |0⟩⟨1|`.

use crate::error::{NcaError, Result};
use crate::hybridization::{sample_flat_band, FlatBandParams, HybridizationTable};
use crate::liouville::{build_liouvillian, JumpOperator, LindbladModel, OperatorMatrix, SuperOp, C64};
use crate::nca::NcaProblem;

/// Annihilation operator of a single fermionic mode.
pub fn annihilation() -> OperatorMatrix {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    OperatorMatrix::from_row_major(2, &[z, one, z, z]).expect("2x2")
}

/// Number operator `d†d`.
pub fn number_operator() -> OperatorMatrix {
    let d = annihilation();
    &d.dagger() * &d
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleLevel {
    /// Level energy `ε₀`.
    pub eps0: f64,
    /// Loss rate (jump `d`).
    pub gamma_l: f64,
    /// Pump rate (jump `d†`).
    pub gamma_p: f64,
    /// Dephasing rate (jump `d†d`).
    pub gamma_d: f64,
}

impl SingleLevel {
    pub fn case_study(eps0: f64, gamma_l: f64, gamma_p: f64, gamma_d: f64) -> Self {
        Self {
            eps0,
            gamma_l,
            gamma_p,
            gamma_d,
        }
    }

    pub fn lindblad_model(&self) -> Result<LindbladModel> {
        let d = annihilation();
        let n = number_operator();
        LindbladModel::new(
            n.scale(C64::new(self.eps0, 0.0)),
            vec![
                JumpOperator {
                    operator: d.clone(),
                    rate: self.gamma_l,
                },
                JumpOperator {
                    operator: d.dagger(),
                    rate: self.gamma_p,
                },
                JumpOperator {
                    operator: n,
                    rate: self.gamma_d,
                },
            ],
        )
    }

    pub fn liouvillian(&self) -> Result<SuperOp> {
        build_liouvillian(&self.lindblad_model()?)
    }

    /// Stationary occupation without the non-Markovian bath, `γ_p/(γ_l+γ_p)`.
    pub fn markovian_stationary_occupation(&self) -> f64 {
        self.gamma_p / (self.gamma_l + self.gamma_p)
    }

    /// `n(t)` of the purely Markovian dynamics starting from occupation `n0`.
    pub fn markovian_occupation(&self, n0: f64, t: f64) -> f64 {
        let ns = self.markovian_stationary_occupation();
        ns + (n0 - ns) * (-(self.gamma_l + self.gamma_p) * t).exp()
    }

    /// Problem with a flat-band bath sampled at `dt` for `steps` steps.
    pub fn problem(&self, bath: FlatBandParams, dt: f64, steps: usize) -> Result<NcaProblem> {
        let table = sample_flat_band(bath, dt, steps)?;
        self.problem_with_table(table, steps)
    }

    pub fn problem_with_table(&self, table: HybridizationTable, steps: usize) -> Result<NcaProblem> {
        NcaProblem::single_mode(self.liouvillian()?, annihilation(), table, steps)
    }
}

/// Source of the non-Markovian hybridization.
#[derive(Debug, Clone, PartialEq)]
pub enum Bath {
    FlatBand(FlatBandParams),
    Tabulated(HybridizationTable),
}

impl Bath {
    /// Table on the grid `dt` covering `steps` steps.
    ///
    /// A tabulated bath keeps its own step, which must agree with `dt` to
    /// 1e-9 relative.
    pub fn table(&self, dt: f64, steps: usize) -> Result<HybridizationTable> {
        match self {
            Bath::FlatBand(p) => sample_flat_band(*p, dt, steps),
            Bath::Tabulated(tab) => {
                if (tab.dt() - dt).abs() > 1e-9 * dt {
                    return Err(NcaError::GridLayout(format!(
                        "tabulated bath step {} does not match grid step {dt}",
                        tab.dt()
                    )));
                }
                if tab.steps() < steps {
                    return Err(NcaError::GridLayout(format!(
                        "tabulated bath covers {} steps, run needs {steps}",
                        tab.steps()
                    )));
                }
                Ok(tab.clone())
            }
        }
    }

    pub fn with_eta(&self, eta: f64) -> Result<Bath> {
        match self {
            Bath::FlatBand(p) => Ok(Bath::FlatBand(FlatBandParams::new(eta, p.w)?)),
            Bath::Tabulated(_) => Err(NcaError::Model("cannot rescale eta of a tabulated bath".into())),
        }
    }

    pub fn with_w(&self, w: f64) -> Result<Bath> {
        match self {
            Bath::FlatBand(p) => Ok(Bath::FlatBand(FlatBandParams::new(p.eta, w)?)),
            Bath::Tabulated(_) => Err(NcaError::Model("cannot change w of a tabulated bath".into())),
        }
    }

    /// True when the bath is a flat band with `η = 0`.
    pub fn is_decoupled(&self) -> bool {
        matches!(self, Bath::FlatBand(p) if p.eta == 0.0)
    }
}

/// A fully specified single-level run.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub level: SingleLevel,
    pub bath: Bath,
    pub dt: f64,
    pub t_max: f64,
    pub rho0: OperatorMatrix,
}

impl Simulation {
    /// Number of steps, `round(t_max/dt)`.
    pub fn steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }

    pub fn problem(&self) -> Result<NcaProblem> {
        if !(self.dt > 0.0) || !(self.t_max >= self.dt) {
            return Err(NcaError::Domain(format!(
                "need dt > 0 and t_max >= dt, got dt = {}, t_max = {}",
                self.dt, self.t_max
            )));
        }
        let steps = self.steps();
        let table = self.bath.table(self.dt, steps)?;
        self.level.problem_with_table(table, steps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn markovian_occupation_limits() {
        let m = SingleLevel::case_study(1.0, 0.3, 0.1, 0.0);
        assert_eq!(m.markovian_occupation(0.0, 0.0), 0.0);
        assert!((m.markovian_occupation(0.0, 100.0) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn number_operator_is_projector_on_occupied() {
        assert_eq!(number_operator(), OperatorMatrix::basis_projector(2, 1));
    }
}
