use std::path::{Path, PathBuf};
use std::time::Instant;

use nca_core::analysis::{evolve_state, occupation, positivity_monitor, propagator_spectrum, SpectrumSeries};
use nca_core::model::{annihilation, Simulation};
use nca_core::{solve_dyson, OperatorMatrix, PropagatorHistory};

use crate::config::RunConfig;
use crate::error::Result;
use crate::output::{ensure_dir, occupation_table, spectrum_table, states_table, to_json_bytes, write_atomic, Summary};

/// Where inputs resolve and outputs go.
#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Directory that relative bath paths resolve against.
    pub base_dir: PathBuf,
    /// Overrides `outputs.out_dir` when set.
    pub out_dir: Option<PathBuf>,
    /// Record wall-clock time in `summary.json`.
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            base_dir: PathBuf::from("."),
            out_dir: None,
            timing: true,
        }
    }
}

impl RunOptions {
    pub fn out_dir(&self, cfg: &RunConfig) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| cfg.outputs.out_dir.clone())
    }
}

/// Occupation series of one solved run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub history: PropagatorHistory,
    pub times: Vec<f64>,
    pub states: Vec<OperatorMatrix>,
    pub occupation: Vec<f64>,
    /// `|tr ρ(t) − 1|`.
    pub trace_err: Vec<f64>,
}

pub fn trajectory(sim: &Simulation) -> Result<Trajectory> {
    let history = solve_dyson(&sim.problem()?)?;
    let states = evolve_state(&history, &sim.rho0)?;
    let d = annihilation();
    Ok(Trajectory {
        times: history.times().collect(),
        occupation: states.iter().map(|rho| occupation(rho, &d)).collect(),
        trace_err: states.iter().map(|rho| (rho.trace() - 1.0).norm()).collect(),
        states,
        history,
    })
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub trajectory: Trajectory,
    pub spectrum: SpectrumSeries,
    pub summary: Summary,
    pub written: Vec<PathBuf>,
}

/// Solves and analyses a run without touching the file system.
pub fn execute(cfg: &RunConfig, opts: &RunOptions) -> Result<RunResult> {
    let start = Instant::now();
    let sim = cfg.simulation(&opts.base_dir)?;
    let traj = trajectory(&sim)?;
    let spectrum = propagator_spectrum(&traj.history)?;
    let max_trace_err = traj
        .trace_err
        .iter()
        .copied()
        .fold(traj.history.max_trace_error(), f64::max);
    let min_state_eigenvalue = positivity_monitor(&traj.states)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let summary = Summary {
        config_echo: cfg.to_json(),
        max_trace_err,
        max_unit_eig_err: spectrum.max_unit_eig_err(),
        min_state_eigenvalue,
        n_final: *traj.occupation.last().expect("at least one grid point"),
        runtime_seconds: opts.timing.then(|| start.elapsed().as_secs_f64()),
        solver_steps: traj.history.steps,
    };
    Ok(RunResult {
        trajectory: traj,
        spectrum,
        summary,
        written: Vec::new(),
    })
}

/// [`execute`] followed by writing the requested files; `summary.json` goes last.
pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Result<RunResult> {
    let mut res = execute(cfg, opts)?;
    let dir = opts.out_dir(cfg);
    ensure_dir(&dir)?;
    let t = &res.trajectory;
    let mut written = Vec::new();
    let mut write = |name: &str, bytes: Vec<u8>| -> Result<()> {
        let path = dir.join(name);
        write_atomic(&path, &bytes)?;
        written.push(path);
        Ok(())
    };
    if cfg.outputs.occupation {
        write(
            "occupation.csv",
            occupation_table(&t.times, &t.occupation, &t.trace_err).render().into_bytes(),
        )?;
    }
    if cfg.outputs.spectrum {
        write("spectrum.csv", spectrum_table(&res.spectrum).render().into_bytes())?;
    }
    if cfg.outputs.states {
        write("states.csv", states_table(&t.times, &t.states).render().into_bytes())?;
    }
    write("summary.json", to_json_bytes(&res.summary))?;
    res.written = written;
    Ok(res)
}

pub fn config_dir(config_path: &Path) -> PathBuf {
    match config_path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}
