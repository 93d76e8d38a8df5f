use nca_core::diagrams::{compare_first_order, BareTermConfig, ORACLE_TOL};
use nca_core::hybridization::sample_flat_band;
use nca_core::model::Bath;
use nca_core::NcaProblem;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::run::RunOptions;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub t: f64,
    pub quad_dt: f64,
    pub max_rel_dev: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub bare_max_abs: f64,
    pub iterate_max_abs: f64,
}

/// Problem whose hybridization grid supports quadrature at `quad_dt` up to `t`.
pub fn oracle_problem(cfg: &RunConfig, t: f64, quad_dt: f64, opts: &RunOptions) -> Result<NcaProblem> {
    let sim = cfg.simulation(&opts.base_dir)?;
    if !(t >= 0.0) || t > cfg.grid.t_max {
        return Err(CliError::config("t", format!("must lie in [0, grid.t_max = {}], got {t}", cfg.grid.t_max)));
    }
    if !(quad_dt > 0.0 && quad_dt.is_finite()) {
        return Err(CliError::config("quad_dt", format!("must be > 0, got {quad_dt}")));
    }
    let table = match &sim.bath {
        Bath::FlatBand(p) => sample_flat_band(*p, quad_dt, (t / quad_dt).ceil() as usize)?,
        Bath::Tabulated(tab) => tab.clone(),
    };
    let steps = ((t / table.dt()).ceil() as usize).min(table.steps());
    Ok(sim.level.problem_with_table(table, steps)?)
}

pub fn oracle(cfg: &RunConfig, t: f64, quad_dt: f64, opts: &RunOptions) -> Result<OracleReport> {
    let prob = oracle_problem(cfg, t, quad_dt, opts)?;
    let bare_cfg = BareTermConfig::new(prob, quad_dt)?;
    let cmp = compare_first_order(t, &bare_cfg)?;
    Ok(OracleReport {
        t,
        quad_dt,
        max_rel_dev: cmp.max_rel_dev,
        tolerance: ORACLE_TOL,
        pass: cmp.pass,
        bare_max_abs: cmp.bare.max_abs(),
        iterate_max_abs: cmp.iterate.max_abs(),
    })
}
