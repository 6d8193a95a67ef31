use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::{Args, Parser, Subcommand};
use hdt_runner::config::{self, ExperimentConfig, Method};
use hdt_runner::experiment::{self, Classification};
use hdt_runner::presets::{preset, PRESET_NAMES};
use hdt_runner::{diagnostics, output};
use hdt_core::{hermitian_eig, HamiltonianSet};

#[derive(Parser)]
#[command(name = "hdt", version, about = "Frame potentials of monitored spin chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the sweep and write rows.csv and summary.json.
    Run(Source),
    /// Write closed-form curves and thresholds without simulating.
    Theory(Source),
    /// Report feasibility diagnostics for a config.
    Validate(Source),
    /// Write the return-fidelity curve of the all-zero state.
    Revival(Source),
    /// Print the Zeno exponent and Hamiltonian constants.
    Classify(Source),
    /// Compare short-time expansions against exact evolution.
    CheckDerivation(Source),
}

#[derive(Args)]
struct Source {
    #[arg(long, value_name = "PATH", conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    #[arg(long = "samples", value_name = "M")]
    samples: Option<usize>,
}

enum Failure {
    Config(String),
    ResourceLimit(String),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<hdt_core::Error>() {
            Some(hdt_core::Error::ResourceLimit { .. }) => {
                Failure::ResourceLimit(format!("{e}\nhint: rerun with --method sample --samples M"))
            }
            _ => Failure::Other(e),
        }
    }
}

impl From<hdt_core::Error> for Failure {
    fn from(e: hdt_core::Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

impl Source {
    fn resolve(&self) -> Result<ExperimentConfig, Failure> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => config::load(path).map_err(|e| Failure::Config(e.to_string()))?,
            (None, Some(name)) => preset(name).ok_or_else(|| {
                Failure::Config(format!("unknown preset {name:?}; available: {}", PRESET_NAMES.join(", ")))
            })?,
            (None, None) => unreachable!("clap requires a source"),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(dir) = &self.out {
            cfg.output_dir = dir.clone();
        }
        if let Some(method) = self.method {
            cfg.method = method;
        }
        if let Some(m) = self.samples {
            cfg.samples = m;
        }
        cfg.check().map_err(|m| Failure::Config(format!("after command-line overrides: {m}")))?;
        Ok(cfg)
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run(src) => {
            let cfg = src.resolve()?;
            let out = experiment::run(&cfg)?;
            let dir = &cfg.output_dir;
            output::write_text(dir, "rows.csv", &output::rows_csv(&out.rows))?;
            if let Some(points) = &out.revival_points {
                output::write_text(dir, "revival.csv", &output::revival_csv(points))?;
            }
            if let Some(d) = &out.summary.derivation {
                output::write_text(dir, "derivation.csv", &output::derivation_csv(&d.report.rows))?;
            }
            output::write_json(dir, "summary.json", &out.summary)?;
            eprintln!("wrote {} rows to {}", out.rows.len(), dir.display());
        }
        Command::Theory(src) => {
            let cfg = src.resolve()?;
            let out = experiment::theory_only(&cfg)?;
            output::write_text(&cfg.output_dir, "theory.csv", &output::rows_csv(&out.rows))?;
            output::write_json(&cfg.output_dir, "summary.json", &out.summary)?;
            print_json(&out.summary.thresholds)?;
        }
        Command::Validate(src) => {
            let cfg = src.resolve()?;
            let diags = diagnostics::validate(&cfg);
            if diags.is_empty() {
                println!("ok: no diagnostics");
            }
            for d in diags {
                println!("{d}");
            }
        }
        Command::Revival(src) => {
            let cfg = src.resolve()?;
            let hs = HamiltonianSet::build(&cfg.hamiltonian)?;
            let out = experiment::revival(&hermitian_eig(hs.h())?, &cfg)?;
            output::write_text(&cfg.output_dir, "revival.csv", &output::revival_csv(&out.points))?;
            print_json(&out.summary)?;
        }
        Command::Classify(src) => {
            let cfg = src.resolve()?;
            let c: Classification = experiment::classify(&cfg)?;
            print_json(&c)?;
        }
        Command::CheckDerivation(src) => {
            let cfg = src.resolve()?;
            let d = experiment::derivation(&cfg)?;
            output::write_text(&cfg.output_dir, "derivation.csv", &output::derivation_csv(&d.report.rows))?;
            print_json(&d)?;
        }
    }
    Ok(())
}

fn exit_status(result: Result<(), Failure>) -> u8 {
    match result {
        Ok(()) => 0,
        Err(Failure::Config(msg)) => {
            eprintln!("error: invalid config: {msg}");
            2
        }
        Err(Failure::ResourceLimit(msg)) => {
            eprintln!("error: {msg}");
            3
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {:#}", anyhow!(e));
            1
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(exit_status(execute(cli.command)))
}
