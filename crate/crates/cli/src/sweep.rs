use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use nca_core::analysis::is_stationary;
use rayon::prelude::*;

use crate::config::{BathConfig, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{ensure_dir, fmt_f64, occupation_table, Table};
use crate::run::{trajectory, RunOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParam {
    Eta,
    W,
    GammaD,
    Eps0,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Eta => "eta",
            SweepParam::W => "w",
            SweepParam::GammaD => "gamma_d",
            SweepParam::Eps0 => "eps0",
        }
    }

    /// Copy of `cfg` with this parameter set to `value`.
    pub fn apply(self, cfg: &RunConfig, value: f64) -> Result<RunConfig> {
        let mut out = cfg.clone();
        match (self, &mut out.bath) {
            (SweepParam::Eta, BathConfig::FlatBand { eta, .. }) => *eta = value,
            (SweepParam::W, BathConfig::FlatBand { w, .. }) => *w = value,
            (SweepParam::Eta | SweepParam::W, BathConfig::Tabulated { .. }) => {
                return Err(CliError::config(
                    "bath.kind",
                    format!("cannot sweep `{}` of a tabulated bath", self.name()),
                ))
            }
            (SweepParam::GammaD, _) => out.model.gamma_d = value,
            (SweepParam::Eps0, _) => out.model.eps0 = value,
        }
        Ok(out)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eta" => Ok(SweepParam::Eta),
            "w" => Ok(SweepParam::W),
            "gamma_d" => Ok(SweepParam::GammaD),
            "eps0" => Ok(SweepParam::Eps0),
            other => Err(CliError::config(
                "param",
                format!("unknown sweep parameter `{other}`, expected one of eta, w, gamma_d, eps0"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub n_final: f64,
    pub stationary: bool,
    pub times: Vec<f64>,
    pub occupation: Vec<f64>,
    pub trace_err: Vec<f64>,
}

/// One run per value, sorted by value. Runs use up to `jobs` threads.
pub fn sweep(cfg: &RunConfig, param: SweepParam, values: &[f64], jobs: usize, opts: &RunOptions) -> Result<Vec<SweepRow>> {
    let mut values = values.to_vec();
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(CliError::config("values", format!("non-finite value {bad}")));
    }
    values.sort_by(f64::total_cmp);
    let configs: Vec<RunConfig> = values.iter().map(|&v| param.apply(cfg, v)).collect::<Result<_>>()?;
    let one = |(value, c): (&f64, &RunConfig)| -> Result<SweepRow> {
        let t = trajectory(&c.simulation(&opts.base_dir)?)?;
        Ok(SweepRow {
            value: *value,
            n_final: *t.occupation.last().unwrap(),
            stationary: is_stationary(&t.occupation),
            times: t.times,
            occupation: t.occupation,
            trace_err: t.trace_err,
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| values.par_iter().zip(configs.par_iter()).map(one).collect())
}

pub fn sweep_table(param: SweepParam, rows: &[SweepRow]) -> Table {
    let mut t = Table::new([param.name(), "n_final", "stationary_flag"]);
    for r in rows {
        t.push_row(&[
            fmt_f64(r.value),
            fmt_f64(r.n_final),
            if r.stationary { "1" } else { "0" }.to_string(),
        ]);
    }
    t
}

/// Writes `sweep_<param>.csv` and, with `keep_series`, one
/// `occupation_<param>_<index>.csv` per row in sorted order.
pub fn write_sweep(
    dir: &std::path::Path,
    param: SweepParam,
    rows: &[SweepRow],
    keep_series: bool,
) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    if keep_series {
        for (k, r) in rows.iter().enumerate() {
            let path = dir.join(format!("occupation_{param}_{k}.csv"));
            occupation_table(&r.times, &r.occupation, &r.trace_err).write(&path)?;
            written.push(path);
        }
    }
    let path = dir.join(format!("sweep_{param}.csv"));
    sweep_table(param, rows).write(&path)?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_names_round_trip() {
        for p in [SweepParam::Eta, SweepParam::W, SweepParam::GammaD, SweepParam::Eps0] {
            assert_eq!(p.name().parse::<SweepParam>().unwrap(), p);
        }
        assert!(matches!("gamma_x".parse::<SweepParam>(), Err(CliError::Config { .. })));
    }

    #[test]
    fn empty_sweep_has_only_a_header() {
        assert_eq!(sweep_table(SweepParam::Eta, &[]).render(), "eta,n_final,stationary_flag\n");
    }
}
