//! Built-in parameter sets for the reference runs.

use std::path::PathBuf;

use crate::config::{BathConfig, GridConfig, InitialState, ModelConfig, OutputConfig, RunConfig};
use crate::sweep::SweepParam;

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub config: RunConfig,
    /// Default parameter and values for `nca sweep`.
    pub sweep: Option<(SweepParam, Vec<f64>)>,
}

pub const PRESET_NAMES: [&str; 5] = ["fig3", "fig4-eta", "fig4-w", "fig4-dephasing", "fig4-scan"];

fn config(eps0: f64, dt: f64, t_max: f64, out_dir: &str) -> RunConfig {
    RunConfig {
        model: ModelConfig {
            eps0,
            gamma_l: 0.5,
            gamma_p: 0.5,
            gamma_d: 0.5,
        },
        bath: BathConfig::FlatBand { eta: 1.0, w: 10.0 },
        grid: GridConfig { dt, t_max },
        initial_state: InitialState {
            basis_label: Some(0),
            matrix: None,
        },
        outputs: OutputConfig {
            occupation: true,
            spectrum: true,
            states: false,
            out_dir: PathBuf::from(out_dir),
        },
    }
}

pub fn preset(name: &str) -> Option<Preset> {
    let p = match name {
        "fig3" => Preset {
            name: "fig3",
            description: "eigenvalue spectrum of V(t): eps0=5, rates 0.5, eta=1, w=10, dt=0.02, t_max=10",
            config: config(5.0, 0.02, 10.0, "out/fig3"),
            sweep: None,
        },
        "fig4-eta" => Preset {
            name: "fig4-eta",
            description: "occupation dynamics for several coupling strengths eta",
            config: config(1.0, 0.02, 10.0, "out/fig4-eta"),
            sweep: Some((SweepParam::Eta, vec![0.0, 1.0, 2.0])),
        },
        "fig4-w" => Preset {
            name: "fig4-w",
            description: "occupation dynamics for several band parameters w",
            config: config(1.0, 0.005, 10.0, "out/fig4-w"),
            sweep: Some((SweepParam::W, vec![10.0, 20.0, 40.0, 80.0])),
        },
        "fig4-dephasing" => Preset {
            name: "fig4-dephasing",
            description: "occupation dynamics for several dephasing rates",
            config: config(1.0, 0.02, 10.0, "out/fig4-dephasing"),
            sweep: Some((SweepParam::GammaD, vec![0.0, 0.5, 1.0, 2.0])),
        },
        "fig4-scan" => Preset {
            name: "fig4-scan",
            description: "stationary occupation against the level energy eps0",
            config: config(1.0, 0.02, 20.0, "out/fig4-scan"),
            sweep: Some((SweepParam::Eps0, (-5..=5).map(f64::from).collect())),
        },
        _ => return None,
    };
    Some(p)
}
