use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nca_cli::converge::converge;
use nca_cli::oracle::oracle;
use nca_cli::output::{describe, ensure_dir, to_json_bytes, write_atomic};
use nca_cli::presets::{preset, PRESET_NAMES};
use nca_cli::run::{config_dir, run, RunOptions};
use nca_cli::sweep::{sweep, write_sweep, SweepParam};
use nca_cli::{CliError, Result, RunConfig};

#[derive(Parser)]
#[command(name = "nca", version, about = "Non-crossing approximation solver for a dissipative single-level impurity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// JSON run configuration.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in parameter set (see `nca presets`).
    #[arg(long)]
    preset: Option<String>,
    /// Overrides `outputs.out_dir`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration and write occupation, spectrum and summary files.
    Run {
        #[command(flatten)]
        source: Source,
        /// Write `runtime_seconds: null` so that repeated runs are byte-identical.
        #[arg(long)]
        no_timing: bool,
    },
    /// One run per parameter value; writes `sweep_<param>.csv`.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// eta, w, gamma_d or eps0. Defaults to the preset's sweep.
        #[arg(long)]
        param: Option<String>,
        /// Comma-separated values such as `-1,0,2.5`; `--values ""` gives an empty sweep.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_values)]
        values: Option<Values>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Also write each run's occupation series.
        #[arg(long)]
        keep_series: bool,
    },
    /// Self-convergence of n(t) over decreasing step sizes; writes `converge.json`.
    Converge {
        #[command(flatten)]
        source: Source,
        #[arg(long, num_args = 1.., value_delimiter = ',', required = true)]
        dts: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Compare the first-order bare diagram with the first Dyson iterate; writes `oracle.json`.
    Oracle {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        quad_dt: f64,
    },
    /// List the built-in presets.
    Presets,
    /// Print a preset as a JSON configuration.
    Preset { name: String },
}

#[derive(Clone)]
struct Values(Vec<f64>);

fn parse_values(text: &str) -> std::result::Result<Values, String> {
    text.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse().map_err(|e| format!("`{v}`: {e}")))
        .collect::<std::result::Result<_, _>>()
        .map(Values)
}

struct Loaded {
    config: RunConfig,
    opts: RunOptions,
    preset_sweep: Option<(SweepParam, Vec<f64>)>,
}

fn load(source: &Source, timing: bool) -> Result<Loaded> {
    let (config, base_dir, preset_sweep) = match (&source.config, &source.preset) {
        (Some(path), _) => (nca_cli::config::load_config(path)?, config_dir(path), None),
        (None, Some(name)) => {
            let p = find_preset(name)?;
            (p.config, PathBuf::from("."), p.sweep)
        }
        (None, None) => return Err(CliError::config("config", "give --config or --preset")),
    };
    config.validate()?;
    Ok(Loaded {
        config,
        opts: RunOptions {
            base_dir,
            out_dir: source.out_dir.clone(),
            timing,
        },
        preset_sweep,
    })
}

fn find_preset(name: &str) -> Result<nca_cli::presets::Preset> {
    preset(name).ok_or_else(|| {
        CliError::config("preset", format!("unknown preset `{name}`, expected one of {}", PRESET_NAMES.join(", ")))
    })
}

fn write_report<T: serde::Serialize>(dir: &std::path::Path, name: &str, report: &T) -> Result<PathBuf> {
    ensure_dir(dir)?;
    let path = dir.join(name);
    write_atomic(&path, &to_json_bytes(report))?;
    Ok(path)
}

fn dispatch(cmd: Command) -> Result<i32> {
    let mut out = std::io::stdout().lock();
    match cmd {
        Command::Run { source, no_timing } => {
            let l = load(&source, !no_timing)?;
            let res = run(&l.config, &l.opts)?;
            let _ = write!(out, "{}", describe(&res.written));
        }
        Command::Sweep {
            source,
            param,
            values,
            jobs,
            keep_series,
        } => {
            let l = load(&source, true)?;
            let values = values.map(|v| v.0);
            let (param, values) = match (param, values, l.preset_sweep) {
                (Some(p), Some(v), _) => (p.parse()?, v),
                (Some(p), None, Some((dp, dv))) if p.parse::<SweepParam>()? == dp => (dp, dv),
                (None, v, Some((dp, dv))) => (dp, v.unwrap_or(dv)),
                (None, _, None) => return Err(CliError::config("param", "required without a preset sweep")),
                (Some(_), None, _) => return Err(CliError::config("values", "required for this parameter")),
            };
            let rows = sweep(&l.config, param, &values, jobs, &l.opts)?;
            let written = write_sweep(&l.opts.out_dir(&l.config), param, &rows, keep_series)?;
            let _ = write!(out, "{}", describe(&written));
        }
        Command::Converge { source, dts, jobs } => {
            let l = load(&source, true)?;
            let report = converge(&l.config, &dts, jobs, &l.opts)?;
            let path = write_report(&l.opts.out_dir(&l.config), "converge.json", &report)?;
            let _ = out.write_all(&to_json_bytes(&report));
            let _ = write!(out, "{}", describe(&[path]));
        }
        Command::Oracle { source, t, quad_dt } => {
            let l = load(&source, true)?;
            let report = oracle(&l.config, t, quad_dt, &l.opts)?;
            let path = write_report(&l.opts.out_dir(&l.config), "oracle.json", &report)?;
            let _ = out.write_all(&to_json_bytes(&report));
            let _ = writeln!(out, "{}", if report.pass { "PASS" } else { "FAIL" });
            let _ = write!(out, "{}", describe(&[path]));
            if !report.pass {
                return Ok(1);
            }
        }
        Command::Presets => {
            for name in PRESET_NAMES {
                let p = preset(name).expect("listed preset");
                let _ = writeln!(out, "{:<16} {}", p.name, p.description);
            }
        }
        Command::Preset { name } => {
            let p = find_preset(&name)?;
            let _ = out.write_all(&to_json_bytes(&p.config));
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{}", e.to_record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
