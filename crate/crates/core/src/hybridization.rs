//! Bath hybridization functions and their Keldysh contour components.
//!
//! Only the lesser (`Δ^{+−}`) and greater (`Δ^{−+}`) functions are stored.
//! The time-ordered (`++`) and anti-time-ordered (`−−`) components are
//! assembled from them with Heaviside rules, see [`contour_component`].

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{NcaError, Result};
use crate::liouville::C64;

/// Branch of the two-branch Keldysh contour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Forward branch, operators to the left of the density matrix.
    Plus,
    /// Backward branch, operators to the right of the density matrix.
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Exchange statistics of the bath particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistics {
    Fermion,
    Boson,
}

impl Statistics {
    /// `ξ = −1` for fermions, `+1` for bosons.
    pub fn xi(self) -> f64 {
        match self {
            Statistics::Fermion => -1.0,
            Statistics::Boson => 1.0,
        }
    }
}

/// Which side of an equal-time point a component is evaluated on.
///
/// `FirstLater` is the limit `t1 → t2⁺`; `FirstEarlier` is `t1 → t2⁻`. The
/// two only differ at `t1 = t2` and only for the `++` and `−−` components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EqualTimeSide {
    FirstLater,
    FirstEarlier,
}

/// Zero-temperature particle-hole symmetric flat band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatBandParams {
    /// Coupling strength `η`.
    pub eta: f64,
    /// Band parameter `w`.
    pub w: f64,
}

impl FlatBandParams {
    pub fn new(eta: f64, w: f64) -> Result<Self> {
        if !(eta >= 0.0) || !eta.is_finite() {
            return Err(NcaError::Model(format!("eta must be >= 0, got {eta}")));
        }
        if !(w > 0.0) || !w.is_finite() {
            return Err(NcaError::Model(format!("w must be > 0, got {w}")));
        }
        Ok(Self { eta, w })
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `Δ^{+−}(t) = 2iη e^{iwt/2} sin(wt/2)/t`, with the limit `iηw` at `t = 0`.
pub fn flat_band_lesser(t: f64, p: FlatBandParams) -> C64 {
    let x = 0.5 * p.w * t;
    let amp = p.eta * p.w * sinc(x);
    let (s, c) = x.sin_cos();
    C64::new(-amp * s, amp * c)
}

/// `Δ^{−+}(t) = −2iη e^{−iwt/2} sin(wt/2)/t`, with the limit `−iηw` at `t = 0`.
pub fn flat_band_greater(t: f64, p: FlatBandParams) -> C64 {
    let x = 0.5 * p.w * t;
    let amp = p.eta * p.w * sinc(x);
    let (s, c) = x.sin_cos();
    C64::new(-amp * s, -amp * c)
}

/// Lesser and greater hybridization sampled on `t = j·dt`, `j = −L..=L`.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridizationTable {
    dt: f64,
    steps: usize,
    statistics: Statistics,
    // index j + steps
    lesser: Vec<C64>,
    greater: Vec<C64>,
}

impl HybridizationTable {
    /// Builds a two-sided table from `2·steps + 1` samples starting at `t = −steps·dt`.
    pub fn new(
        dt: f64,
        steps: usize,
        statistics: Statistics,
        lesser: Vec<C64>,
        greater: Vec<C64>,
    ) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(NcaError::GridLayout(format!("dt must be > 0, got {dt}")));
        }
        let len = 2 * steps + 1;
        if lesser.len() != len || greater.len() != len {
            return Err(NcaError::GridLayout(format!(
                "a table with {steps} steps needs {len} samples per component, got {} and {}",
                lesser.len(),
                greater.len()
            )));
        }
        Ok(Self {
            dt,
            steps,
            statistics,
            lesser,
            greater,
        })
    }

    /// Samples two closures on the symmetric grid.
    pub fn from_fn(
        dt: f64,
        steps: usize,
        statistics: Statistics,
        lesser: impl Fn(f64) -> C64,
        greater: impl Fn(f64) -> C64,
    ) -> Result<Self> {
        let times: Vec<f64> = (-(steps as i64)..=steps as i64).map(|j| j as f64 * dt).collect();
        Self::new(
            dt,
            steps,
            statistics,
            times.iter().map(|&t| lesser(t)).collect(),
            times.iter().map(|&t| greater(t)).collect(),
        )
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Largest `L` such that `±L·dt` is tabulated.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn xi(&self) -> f64 {
        self.statistics.xi()
    }

    fn index(&self, j: i64) -> Option<usize> {
        if j.unsigned_abs() as usize > self.steps {
            None
        } else {
            Some((j + self.steps as i64) as usize)
        }
    }

    /// `Δ^{+−}(j·dt)`, `None` outside the table.
    pub fn lesser(&self, j: i64) -> Option<C64> {
        self.index(j).map(|k| self.lesser[k])
    }

    /// `Δ^{−+}(j·dt)`, `None` outside the table.
    pub fn greater(&self, j: i64) -> Option<C64> {
        self.index(j).map(|k| self.greater[k])
    }

    /// Iterates `(t, lesser, greater)` in ascending `t`.
    pub fn samples(&self) -> impl Iterator<Item = (f64, C64, C64)> + '_ {
        let l = self.steps as i64;
        (-l..=l).map(move |j| {
            let k = (j + l) as usize;
            (j as f64 * self.dt, self.lesser[k], self.greater[k])
        })
    }

    /// Converts a time difference to a grid lag.
    pub fn lag_of(&self, tau: f64) -> Result<i64> {
        grid_lag(tau, self.dt)
    }

    /// Contour component at signed lag `j = (t1 − t2)/dt`.
    pub fn component_at_lag(
        &self,
        g1: Branch,
        g2: Branch,
        j: i64,
        side: EqualTimeSide,
    ) -> Result<C64> {
        let first_later = j > 0 || (j == 0 && side == EqualTimeSide::FirstLater);
        let value = match (g1, g2) {
            (Branch::Plus, Branch::Minus) => self.lesser(j),
            (Branch::Minus, Branch::Plus) => self.greater(j),
            (Branch::Plus, Branch::Plus) => {
                if first_later {
                    self.greater(j)
                } else {
                    self.lesser(j)
                }
            }
            (Branch::Minus, Branch::Minus) => {
                if first_later {
                    self.lesser(j)
                } else {
                    self.greater(j)
                }
            }
        };
        value.ok_or(NcaError::Grid {
            time: j as f64 * self.dt,
            dt: self.dt,
        })
    }

    /// Writes the table in the tabulated-bath CSV format.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for (t, l, g) in self.samples() {
            writeln!(out, "{},{},{},{},{}", t, l.re, l.im, g.re, g.im).unwrap();
        }
        out
    }
}

/// Signed lag `j` with `|tau − j·dt| ≤ 1e-9·dt`.
pub(crate) fn grid_lag(tau: f64, dt: f64) -> Result<i64> {
    let j = (tau / dt).round();
    if !j.is_finite() || (tau - j * dt).abs() > 1e-9 * dt {
        return Err(NcaError::Grid { time: tau, dt });
    }
    Ok(j as i64)
}

/// `Δ^{g1 g2}(t1, t2)` assembled from the lesser/greater table.
///
/// `+−` is lesser and `−+` greater. For `t1 > t2` the time-ordered `++`
/// equals greater and the anti-time-ordered `−−` equals lesser; for
/// `t1 < t2` they swap. At equal times `++` takes the greater value and `−−`
/// the lesser one (the limit `t1 → t2⁺`).
pub fn contour_component(
    g1: Branch,
    g2: Branch,
    t1: f64,
    t2: f64,
    tab: &HybridizationTable,
) -> Result<C64> {
    let j = tab.lag_of(t1 - t2)?;
    tab.component_at_lag(g1, g2, j, EqualTimeSide::FirstLater)
}

/// Samples the flat-band closed forms on `j·dt`, `j = −L..=L`.
pub fn sample_flat_band(p: FlatBandParams, dt: f64, steps: usize) -> Result<HybridizationTable> {
    HybridizationTable::from_fn(
        dt,
        steps,
        Statistics::Fermion,
        |t| flat_band_lesser(t, p),
        |t| flat_band_greater(t, p),
    )
}

pub const CSV_HEADER: &str = "t,re_lesser,im_lesser,re_greater,im_greater";

/// Parses a tabulated fermionic bath.
///
/// Rows must be ascending and uniformly spaced (checked to 1e-9 relative to
/// the step inferred from the first two rows) and must cover a grid symmetric
/// about `t = 0`.
pub fn parse_tabulated(text: &str, source_name: &str) -> Result<HybridizationTable> {
    let perr = |line: usize, reason: String| NcaError::Parse {
        source_name: source_name.to_string(),
        line,
        reason,
    };

    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or_else(|| perr(1, "empty file".into()))?;
    let header_fields: Vec<&str> = header.split(',').map(str::trim).collect();
    if header_fields.join(",") != CSV_HEADER {
        return Err(perr(hline, format!("expected header `{CSV_HEADER}`")));
    }

    let mut times = Vec::new();
    let mut lesser = Vec::new();
    let mut greater = Vec::new();
    for (lineno, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(perr(lineno, format!("expected 5 fields, got {}", fields.len())));
        }
        let mut vals = [0.0f64; 5];
        for (v, f) in vals.iter_mut().zip(&fields) {
            *v = f
                .parse::<f64>()
                .map_err(|e| perr(lineno, format!("invalid number `{f}`: {e}")))?;
            if !v.is_finite() {
                return Err(perr(lineno, format!("non-finite value `{f}`")));
            }
        }
        times.push((lineno, vals[0]));
        lesser.push(C64::new(vals[1], vals[2]));
        greater.push(C64::new(vals[3], vals[4]));
    }

    if times.len() < 3 {
        return Err(perr(
            hline,
            format!("need at least 3 rows (t = -dt, 0, dt), got {}", times.len()),
        ));
    }
    if times.len() % 2 == 0 {
        return Err(NcaError::GridLayout(format!(
            "{source_name}: a symmetric table needs an odd number of rows, got {}",
            times.len()
        )));
    }

    let dt = times[1].1 - times[0].1;
    if !(dt > 0.0) {
        return Err(NcaError::GridLayout(format!(
            "{source_name}: times must be strictly ascending (line {})",
            times[1].0
        )));
    }
    for w in times.windows(2) {
        let step = w[1].1 - w[0].1;
        if (step - dt).abs() > 1e-9 * dt {
            return Err(NcaError::GridLayout(format!(
                "{source_name}: non-uniform grid at line {} (step {step}, expected {dt})",
                w[1].0
            )));
        }
    }
    let steps = times.len() / 2;
    let (mid_line, t_mid) = times[steps];
    // accumulated spacing error may reach 1e-9 per row
    if t_mid.abs() > 1e-9 * dt * (steps as f64).max(1.0) {
        return Err(NcaError::GridLayout(format!(
            "{source_name}: table must be symmetric about t = 0 (middle row at line {mid_line} has t = {t_mid})"
        )));
    }

    HybridizationTable::new(dt, steps, Statistics::Fermion, lesser, greater)
}

pub fn load_tabulated(path: &Path) -> Result<HybridizationTable> {
    let text = std::fs::read_to_string(path).map_err(|e| NcaError::Parse {
        source_name: path.display().to_string(),
        line: 0,
        reason: format!("cannot read bath file: {e}"),
    })?;
    parse_tabulated(&text, &path.display().to_string())
}

pub fn save_tabulated(tab: &HybridizationTable, path: &Path) -> Result<()> {
    std::fs::write(path, tab.to_csv_string()).map_err(|source| NcaError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> FlatBandParams {
        FlatBandParams::new(1.0, 10.0).unwrap()
    }

    #[test]
    fn flat_band_limits() {
        let p = FlatBandParams::new(0.7, 3.0).unwrap();
        assert_eq!(flat_band_lesser(0.0, p), C64::new(0.0, 0.7 * 3.0));
        assert_eq!(flat_band_greater(0.0, p), C64::new(0.0, -0.7 * 3.0));
        let zero = flat_band_lesser(2.0 * std::f64::consts::PI / p.w, p);
        assert!(zero.norm() < 1e-14, "{zero}");
    }

    #[test]
    fn sinc_branches_agree_near_switch() {
        let x = 0.99999e-4f64;
        assert!((sinc(x) - x.sin() / x).abs() < 1e-15);
        let y = 1.00001e-4f64;
        let series = 1.0 - y * y / 6.0 + y.powi(4) / 120.0;
        assert!((sinc(y) - series).abs() < 1e-15);
    }

    #[test]
    fn params_validate() {
        assert!(FlatBandParams::new(-1.0, 1.0).is_err());
        assert!(FlatBandParams::new(1.0, 0.0).is_err());
    }

    #[test]
    fn causal_assembly() {
        let tab = sample_flat_band(p(), 0.1, 20).unwrap();
        use Branch::*;
        let (t1, t2) = (1.3, 0.4);
        assert_eq!(
            contour_component(Plus, Plus, t1, t2, &tab).unwrap(),
            contour_component(Minus, Plus, t1, t2, &tab).unwrap()
        );
        assert_eq!(
            contour_component(Minus, Minus, t1, t2, &tab).unwrap(),
            contour_component(Plus, Minus, t1, t2, &tab).unwrap()
        );
        // anti-causal side swaps
        assert_eq!(
            contour_component(Plus, Plus, t2, t1, &tab).unwrap(),
            contour_component(Plus, Minus, t2, t1, &tab).unwrap()
        );
        // equal times take the t1 -> t2+ limit
        assert_eq!(
            contour_component(Plus, Plus, 0.5, 0.5, &tab).unwrap(),
            contour_component(Minus, Plus, 0.5, 0.5, &tab).unwrap()
        );
        assert_eq!(contour_component(Plus, Plus, 0.0, 0.0, &tab).unwrap(), C64::new(0.0, -10.0));
        assert_eq!(
            tab.component_at_lag(Plus, Plus, 0, EqualTimeSide::FirstEarlier).unwrap(),
            C64::new(0.0, 10.0)
        );
    }

    #[test]
    fn off_grid_and_out_of_range_are_grid_errors() {
        let tab = sample_flat_band(p(), 0.1, 5).unwrap();
        assert!(matches!(
            contour_component(Branch::Plus, Branch::Minus, 0.15, 0.0, &tab),
            Err(NcaError::Grid { .. })
        ));
        assert!(matches!(
            contour_component(Branch::Plus, Branch::Minus, 0.6, 0.0, &tab),
            Err(NcaError::Grid { .. })
        ));
        assert!(contour_component(Branch::Plus, Branch::Minus, -0.5, 0.0, &tab).is_ok());
    }

    #[test]
    fn zero_coupling_table_is_zero() {
        let tab = sample_flat_band(FlatBandParams::new(0.0, 10.0).unwrap(), 0.05, 30).unwrap();
        assert!(tab.samples().all(|(_, l, g)| l == C64::new(0.0, 0.0) && g.norm() == 0.0));
    }

    #[test]
    fn first_samples_are_analytic_limits() {
        let tab = sample_flat_band(FlatBandParams::new(2.0, 5.0).unwrap(), 0.02, 10).unwrap();
        assert_eq!(tab.lesser(0).unwrap(), C64::new(0.0, 10.0));
        assert_eq!(tab.greater(0).unwrap(), C64::new(0.0, -10.0));
        assert!(tab.lesser(11).is_none());
        assert!(tab.lesser(-10).is_some());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        assert!(matches!(parse_tabulated("", "x"), Err(NcaError::Parse { line: 1, .. })));
        let bad = format!("{CSV_HEADER}\n-0.1,0,0,0,0\n0,0,zz,0,0\n0.1,0,0,0,0\n");
        match parse_tabulated(&bad, "bath.csv") {
            Err(NcaError::Parse { line, source_name, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(source_name, "bath.csv");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_tabulated("t,a,b,c,d\n", "x"),
            Err(NcaError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn parse_rejects_non_uniform_and_asymmetric_grids() {
        let nonuni = format!("{CSV_HEADER}\n-0.1,0,0,0,0\n0,0,0,0,0\n0.2,0,0,0,0\n");
        assert!(matches!(parse_tabulated(&nonuni, "x"), Err(NcaError::GridLayout(_))));
        let shifted = format!("{CSV_HEADER}\n0,0,0,0,0\n0.1,0,0,0,0\n0.2,0,0,0,0\n");
        assert!(matches!(parse_tabulated(&shifted, "x"), Err(NcaError::GridLayout(_))));
    }

    #[test]
    fn missing_file_is_parse_error_with_path() {
        let err = load_tabulated(Path::new("/nonexistent/bath.csv")).unwrap_err();
        match err {
            NcaError::Parse { source_name, .. } => assert!(source_name.contains("bath.csv")),
            other => panic!("unexpected {other:?}"),
        }
    }
}
