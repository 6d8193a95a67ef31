//! Named experiment presets. Register sizes and total times follow the
//! published figure captions; couplings are the library defaults.

use std::path::PathBuf;

use hdt_core::protocol::{DEFAULT_BRANCH_CAP, DEFAULT_PRUNE_THRESHOLD};
use hdt_core::{CouplingSpec, Variant};

use crate::config::{default_derivation_dts, default_emit, default_revival, Emit, ExperimentConfig, Method};

pub const PRESET_NAMES: [&str; 8] = ["fig2a", "fig2b", "fig2c", "fig3", "fig4a", "fig4b", "fig4c", "fig6"];

/// Large-n grid for the Zeno-regime presets.
const ZENO_GRID: [usize; 10] = [20, 30, 40, 60, 80, 120, 160, 240, 320, 480];

fn base(name: &str, variant: Variant, n_s: usize, n_b: usize, total_time: f64, n_list: Vec<usize>) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        hamiltonian: CouplingSpec::with_defaults(variant, n_s, n_b),
        total_time,
        prune_threshold: DEFAULT_PRUNE_THRESHOLD,
        branch_cap: DEFAULT_BRANCH_CAP,
        n_list,
        k_list: vec![1],
        method: Method::Enumerate,
        samples: 4000,
        seed: 0,
        r: 0.1,
        bound_column: false,
        output_dir: PathBuf::from("out").join(name),
        emit: default_emit(),
        revival: default_revival(),
        derivation_dts: default_derivation_dts(),
        evolved_points: 201,
    }
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let cfg = match name {
        "fig2a" => base(name, Variant::Ising, 5, 3, 15.0, (1..=40).collect()),
        "fig2b" => base(name, Variant::Ising, 7, 1, 15.0, (1..=60).collect()),
        "fig2c" => base(name, Variant::Ising, 7, 1, 5.0, (1..=60).collect()),
        "fig3" => base(name, Variant::Ising, 7, 1, 15.0, (1..=12).collect()),
        "fig4a" => base(name, Variant::Ising, 5, 3, 15.0, ZENO_GRID.to_vec()),
        "fig4b" => base(name, Variant::Yy, 5, 3, 15.0, ZENO_GRID.to_vec()),
        "fig4c" => base(name, Variant::Xxx, 5, 3, 15.0, ZENO_GRID.to_vec()),
        "fig6" => {
            let mut cfg = base(name, Variant::Ising, 7, 1, 15.0, (1..=30).collect());
            cfg.emit.insert(Emit::Revival);
            cfg
        }
        _ => return None,
    };
    Some(cfg)
}
