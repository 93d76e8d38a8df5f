use nca_core::analysis::occupation;
use nca_core::liouville::{matrix_exp, unvectorize, vectorize};
use nca_core::model::annihilation;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{GridConfig, RunConfig};
use crate::error::{CliError, Result};
use crate::run::{trajectory, RunOptions};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub dts: Vec<f64>,
    /// Sampling step of every comparison (the largest `dt`).
    pub common_dt: f64,
    /// `max_t |n_{dt_k}(t) − n_{dt_{k+1}}(t)|` on the common grid.
    pub differences: Vec<f64>,
    /// Least-squares slope of `ln difference` against `ln dt`.
    pub order: Option<f64>,
    /// Why `order` is missing, if it is.
    pub order_flag: Option<String>,
    /// Only for a decoupled bath: `max_t |n_{dt_k}(t) − n_exact(t)|`.
    pub exact_errors: Option<Vec<f64>>,
    pub exact_order: Option<f64>,
}

/// Slope of the least-squares line through `(ln x, ln y)`. `None` when any
/// `y` is zero or all `x` coincide.
pub fn fit_order(x: &[f64], y: &[f64]) -> std::result::Result<f64, String> {
    if x.len() < 2 {
        return Err("need at least two points".into());
    }
    if y.iter().any(|&v| !(v > 0.0)) {
        return Err("zero difference between runs".into());
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx < 1e-24 {
        return Err("all step sizes are identical".into());
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok(sxy / sxx)
}

fn strides(dts: &[f64]) -> Result<Vec<usize>> {
    if dts.len() < 3 {
        return Err(CliError::config("dts", format!("need at least 3 step sizes, got {}", dts.len())));
    }
    if let Some(bad) = dts.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
        return Err(CliError::config("dts", format!("step sizes must be > 0, got {bad}")));
    }
    let mut out = vec![1usize];
    for w in dts.windows(2) {
        let ratio = w[0] / w[1];
        let r = ratio.round();
        if r < 1.0 || (ratio - r).abs() > 1e-9 * ratio {
            return Err(CliError::config(
                "dts",
                format!("incompatible grids: {} is not a whole multiple of {}", w[0], w[1]),
            ));
        }
        out.push(out.last().unwrap() * r as usize);
    }
    Ok(out)
}

/// Self-convergence of `n(t)` over `dts` (decreasing, each a whole
/// multiple of the next).
pub fn converge(cfg: &RunConfig, dts: &[f64], jobs: usize, opts: &RunOptions) -> Result<ConvergenceReport> {
    let strides = strides(dts)?;
    let configs: Vec<RunConfig> = dts
        .iter()
        .map(|&dt| {
            let mut c = cfg.clone();
            c.grid = GridConfig { dt, t_max: cfg.grid.t_max };
            c.validate()?;
            Ok(c)
        })
        .collect::<Result<_>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool");
    let runs: Vec<Vec<f64>> = pool.install(|| {
        configs
            .par_iter()
            .map(|c| Ok(trajectory(&c.simulation(&opts.base_dir)?)?.occupation))
            .collect::<Result<_>>()
    })?;

    let coarse_points = runs[0].len();
    let on_common = |k: usize| -> Vec<f64> { (0..coarse_points).map(|j| runs[k][j * strides[k]]).collect() };
    let sampled: Vec<Vec<f64>> = (0..runs.len()).map(on_common).collect();
    let max_diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);

    let differences: Vec<f64> = sampled.windows(2).map(|w| max_diff(&w[0], &w[1])).collect();
    let (order, order_flag) = match fit_order(&dts[..dts.len() - 1], &differences) {
        Ok(p) => (Some(p), None),
        Err(reason) => (None, Some(reason)),
    };

    let sim = cfg.simulation(&opts.base_dir)?;
    let (exact_errors, exact_order) = if sim.bath.is_decoupled() {
        let l = sim.level.liouvillian()?;
        let rho0 = vectorize(&sim.rho0);
        let d = annihilation();
        let exact: Vec<f64> = (0..coarse_points)
            .map(|j| {
                let v = matrix_exp(&l, j as f64 * dts[0])?;
                Ok(occupation(&unvectorize(&v.apply(&rho0)), &d))
            })
            .collect::<Result<_>>()?;
        let errs: Vec<f64> = sampled.iter().map(|s| max_diff(s, &exact)).collect();
        let order = fit_order(dts, &errs).ok();
        (Some(errs), order)
    } else {
        (None, None)
    };

    Ok(ConvergenceReport {
        dts: dts.to_vec(),
        common_dt: dts[0],
        differences,
        order,
        order_flag,
        exact_errors,
        exact_order,
    })
}
