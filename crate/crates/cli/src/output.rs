//! Output files. Floats are written in shortest round-trip form (exponent
//! notation for very small or large magnitudes); every file is written to a
//! temporary sibling and renamed into place.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use nca_core::analysis::SpectrumSeries;
use nca_core::OperatorMatrix;
use serde::Serialize;

use crate::error::{CliError, Result};

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Writes `contents` to `path` atomically.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| CliError::io(&dir, e))?;
    tmp.write_all(contents).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// A CSV table with a mandatory header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    body: String,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            body: String::new(),
        }
    }

    pub fn columns(&self) -> usize {
        self.header.len()
    }

    pub fn push_row(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.header.len(), "row width");
        self.body.push_str(&cells.join(","));
        self.body.push('\n');
    }

    pub fn push_floats(&mut self, values: &[f64]) {
        let cells: Vec<String> = values.iter().map(|&v| fmt_f64(v)).collect();
        self.push_row(&cells);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        out.push_str(&self.body);
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.render().as_bytes())
    }
}

/// `t,n,trace_err`.
pub fn occupation_table(times: &[f64], n: &[f64], trace_err: &[f64]) -> Table {
    let mut t = Table::new(["t", "n", "trace_err"]);
    for k in 0..times.len() {
        t.push_floats(&[times[k], n[k], trace_err[k]]);
    }
    t
}

/// `t,abs_lambda_0,...,abs_lambda_{N²−1},unit_eig_err`.
pub fn spectrum_table(s: &SpectrumSeries) -> Table {
    let width = s.eigenvalues.first().map_or(0, Vec::len);
    let mut header = vec!["t".to_string()];
    header.extend((0..width).map(|k| format!("abs_lambda_{k}")));
    header.push("unit_eig_err".into());
    let mut t = Table::new(header);
    for (j, row) in s.eigenvalues.iter().enumerate() {
        let mut vals = vec![s.times[j]];
        vals.extend(row.iter().map(|z| z.norm()));
        vals.push(s.unit_eig_err[j]);
        t.push_floats(&vals);
    }
    t
}

/// `t,re_rho_00,im_rho_00,re_rho_01,...` in row-major order.
pub fn states_table(times: &[f64], states: &[OperatorMatrix]) -> Table {
    let n = states.first().map_or(0, OperatorMatrix::dim);
    let mut header = vec!["t".to_string()];
    for r in 0..n {
        for c in 0..n {
            header.push(format!("re_rho_{r}{c}"));
            header.push(format!("im_rho_{r}{c}"));
        }
    }
    let mut t = Table::new(header);
    for (time, rho) in times.iter().zip(states) {
        let mut vals = vec![*time];
        for r in 0..n {
            for c in 0..n {
                let z = rho.get(r, c);
                vals.push(z.re);
                vals.push(z.im);
            }
        }
        t.push_floats(&vals);
    }
    t
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub config_echo: serde_json::Value,
    pub max_trace_err: f64,
    pub max_unit_eig_err: f64,
    pub min_state_eigenvalue: f64,
    pub n_final: f64,
    /// `None` when timing is suppressed for byte-reproducible output.
    pub runtime_seconds: Option<f64>,
    pub solver_steps: usize,
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("serializable");
    out.push(b'\n');
    out
}

/// Human-readable list of written files.
pub fn describe(paths: &[PathBuf]) -> String {
    let mut s = String::new();
    for p in paths {
        writeln!(s, "wrote {}", p.display()).unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        let mut t = Table::new(["a", "b"]);
        t.push_floats(&[0.1 + 0.2, 1e-300]);
        let text = t.render();
        assert_eq!(text, "a,b\n0.30000000000000004,1e-300\n");
        assert_eq!(fmt_f64(2.0), "2.0");
        let parsed: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(parsed, vec![0.1 + 0.2, 1e-300]);
    }

    #[test]
    fn empty_table_keeps_header() {
        assert_eq!(Table::new(["eta", "n_final"]).render(), "eta,n_final\n");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
