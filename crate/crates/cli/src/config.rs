//! JSON run configuration.
//!
//! ```json
//! {
//!   "model": {"eps0": 5.0, "gamma_l": 0.5, "gamma_p": 0.5, "gamma_d": 0.5},
//!   "bath": {"kind": "flat_band", "eta": 1.0, "w": 10.0},
//!   "grid": {"dt": 0.02, "t_max": 10.0},
//!   "initial_state": {"basis_label": 0},
//!   "outputs": {"occupation": true, "spectrum": true, "states": false, "out_dir": "out"}
//! }
//! ```
//!
//! Unknown fields are rejected everywhere. A tabulated bath reads
//! `{"kind": "tabulated", "path": "bath.csv"}`; relative paths resolve
//! against the directory of the config file.

use std::path::{Path, PathBuf};

use nca_core::hybridization::{load_tabulated, FlatBandParams};
use nca_core::model::{Bath, SingleLevel, Simulation};
use nca_core::{OperatorMatrix, C64};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub bath: BathConfig,
    pub grid: GridConfig,
    pub initial_state: InitialState,
    pub outputs: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub eps0: f64,
    pub gamma_l: f64,
    pub gamma_p: f64,
    pub gamma_d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BathConfig {
    FlatBand { eta: f64, w: f64 },
    Tabulated { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dt: f64,
    pub t_max: f64,
}

/// Exactly one of the two fields must be present.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_label: Option<u8>,
    /// Row-major `[[[re, im], ...], ...]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "yes")]
    pub occupation: bool,
    #[serde(default = "yes")]
    pub spectrum: bool,
    #[serde(default)]
    pub states: bool,
    pub out_dir: PathBuf,
}

fn yes() -> bool {
    true
}

/// Parses a config document. `source_name` only labels error messages.
pub fn parse_config_str(text: &str, source_name: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { "<root>".to_string() } else { path };
        CliError::config(field, format!("{source_name}: {}", e.inner()))
    })
}

/// Reads and parses a config file. An unreadable file is an I/O error.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config_str(&text, &path.display().to_string())
}

fn finite(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(field, format!("must be finite, got {v}")))
    }
}

fn rate(field: &str, v: f64) -> Result<f64> {
    if finite(field, v)? < 0.0 {
        return Err(CliError::config(field, format!("rates must be >= 0, got {v}")));
    }
    Ok(v)
}

impl RunConfig {
    /// Checks every field, naming the first offending one.
    pub fn validate(&self) -> Result<()> {
        self.level()?;
        self.grid_steps()?;
        self.initial_density()?;
        if let BathConfig::FlatBand { eta, w } = self.bath {
            flat_band("bath", eta, w)?;
        }
        if self.outputs.out_dir.as_os_str().is_empty() {
            return Err(CliError::config("outputs.out_dir", "must not be empty"));
        }
        Ok(())
    }

    pub fn level(&self) -> Result<SingleLevel> {
        let m = &self.model;
        Ok(SingleLevel::case_study(
            finite("model.eps0", m.eps0)?,
            rate("model.gamma_l", m.gamma_l)?,
            rate("model.gamma_p", m.gamma_p)?,
            rate("model.gamma_d", m.gamma_d)?,
        ))
    }

    /// `t_max/dt`, which must be a whole number.
    pub fn grid_steps(&self) -> Result<usize> {
        let GridConfig { dt, t_max } = self.grid;
        if !(finite("grid.dt", dt)? > 0.0) {
            return Err(CliError::config("grid.dt", format!("must be > 0, got {dt}")));
        }
        if !(finite("grid.t_max", t_max)? >= dt) {
            return Err(CliError::config("grid.t_max", format!("must be >= grid.dt, got {t_max}")));
        }
        let steps = (t_max / dt).round();
        if (steps * dt - t_max).abs() > 1e-9 * t_max {
            return Err(CliError::config(
                "grid.t_max",
                format!("{t_max} is not a whole number of steps of {dt}"),
            ));
        }
        Ok(steps as usize)
    }

    pub fn initial_density(&self) -> Result<OperatorMatrix> {
        let s = &self.initial_state;
        let rho = match (&s.basis_label, &s.matrix) {
            (Some(k), None) => {
                if *k > 1 {
                    return Err(CliError::config("initial_state.basis_label", format!("must be 0 or 1, got {k}")));
                }
                OperatorMatrix::basis_projector(2, *k as usize)
            }
            (None, Some(rows)) => {
                if rows.len() != 2 || rows.iter().any(|r| r.len() != 2) {
                    return Err(CliError::config("initial_state.matrix", "must be 2x2"));
                }
                let entries: Vec<C64> = rows.iter().flatten().map(|[re, im]| C64::new(*re, *im)).collect();
                if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(CliError::config("initial_state.matrix", "entries must be finite"));
                }
                OperatorMatrix::from_row_major(2, &entries).map_err(CliError::from)?
            }
            _ => {
                return Err(CliError::config(
                    "initial_state",
                    "give exactly one of `basis_label` or `matrix`",
                ))
            }
        };
        nca_core::analysis::check_density_matrix(&rho, 2)
            .map_err(|e| CliError::config("initial_state", e.to_string()))?;
        Ok(rho)
    }

    /// Resolves the bath, loading a tabulated file relative to `base_dir`.
    pub fn bath(&self, base_dir: &Path) -> Result<Bath> {
        match &self.bath {
            BathConfig::FlatBand { eta, w } => Ok(Bath::FlatBand(flat_band("bath", *eta, *w)?)),
            BathConfig::Tabulated { path } => {
                let full = if path.is_absolute() {
                    path.clone()
                } else {
                    base_dir.join(path)
                };
                Ok(Bath::Tabulated(load_tabulated(&full)?))
            }
        }
    }

    pub fn simulation(&self, base_dir: &Path) -> Result<Simulation> {
        self.validate()?;
        Ok(Simulation {
            level: self.level()?,
            bath: self.bath(base_dir)?,
            dt: self.grid.dt,
            t_max: self.grid.t_max,
            rho0: self.initial_density()?,
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

fn flat_band(prefix: &str, eta: f64, w: f64) -> Result<FlatBandParams> {
    let eta_field = format!("{prefix}.eta");
    let w_field = format!("{prefix}.w");
    if !(finite(&eta_field, eta)? >= 0.0) {
        return Err(CliError::config(eta_field, format!("must be >= 0, got {eta}")));
    }
    if !(finite(&w_field, w)? > 0.0) {
        return Err(CliError::config(w_field, format!("must be > 0, got {w}")));
    }
    Ok(FlatBandParams::new(eta, w)?)
}
