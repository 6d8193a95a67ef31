//! Pre-flight checks on a config. These never fail a run; they flag work
//! that is likely to hit resource limits or produce empty columns.

use serde::Serialize;

use crate::config::{ExperimentConfig, Method};

/// Registers above this size make the dense eigensolve the bottleneck.
pub const DIMENSION_WARNING_QUBITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Warning,
    Note,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub level: Level,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.level {
            Level::Warning => "warning",
            Level::Note => "note",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

/// `log2` of the unpruned record count `(2^{n_b})^{n_max}`.
pub fn branch_exponent(cfg: &ExperimentConfig) -> usize {
    cfg.hamiltonian.n_b * cfg.n_max()
}

pub fn validate(cfg: &ExperimentConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if cfg.method == Method::Enumerate {
        let exponent = branch_exponent(cfg);
        let exceeds = exponent >= 64 || (1u64 << exponent) > cfg.branch_cap as u64;
        if exceeds {
            let scope = if cfg.k_list.iter().any(|&k| k >= 2) {
                "orders K >= 2 will rely on pruning"
            } else {
                "K = 1 is computed without branch enumeration, but K >= 2 would rely on pruning"
            };
            out.push(Diagnostic {
                level: Level::Warning,
                message: format!(
                    "2^{exponent} branches at n = {} exceed the cap of {} before pruning; {scope}; use --method sample or raise prune_threshold",
                    cfg.n_max(),
                    cfg.branch_cap
                ),
            });
        }
    }
    let qubits = cfg.hamiltonian.n_s + cfg.hamiltonian.n_b;
    if qubits > DIMENSION_WARNING_QUBITS {
        out.push(Diagnostic {
            level: Level::Warning,
            message: format!(
                "{qubits} qubits exceed {DIMENSION_WARNING_QUBITS}; the dense eigensolve on dimension 2^{qubits} will dominate"
            ),
        });
    }
    if cfg.bound_column && !cfg.k_list.iter().any(|&k| k >= 2) {
        out.push(Diagnostic {
            level: Level::Note,
            message: "the higher-order lower bound and its q_K factor are defined only for K >= 2; with k_list = [1] the bound columns stay empty".into(),
        });
    }
    out
}
