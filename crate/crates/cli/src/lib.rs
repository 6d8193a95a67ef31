//! Config-driven experiment runner: sweeps over measurement counts and
//! frame-potential orders, theory overlays, and tidy CSV/JSON output.

pub mod config;
pub mod diagnostics;
pub mod experiment;
pub mod output;
pub mod presets;

pub use config::{ConfigError, Emit, ExperimentConfig, Method};
pub use experiment::{run, theory_only, RunOutput, SweepRow};
