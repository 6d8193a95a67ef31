//! Experiment configuration.
//!
//! A config is a TOML document with `[hamiltonian]`, `[protocol]`,
//! `[sweep]` and `[output]` sections, plus optional `[revival]` and
//! `[derivation]` sections. Unknown keys are rejected. Every error that can
//! be traced to a key carries the line it came from.

use std::collections::BTreeSet;
use std::ops::Range;
use std::path::{Path, PathBuf};

use hdt_core::protocol::{DEFAULT_BRANCH_CAP, DEFAULT_PRUNE_THRESHOLD};
use hdt_core::{CouplingSpec, Variant};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::Spanned;

/// Largest register the runner accepts; the eigensolve is dense.
pub const MAX_QUBITS: usize = 14;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{source_name}:{line}: {message}")]
    At { source_name: String, line: usize, message: String },
    #[error("{0}")]
    Io(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Enumerate,
    Sample,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Enumerate => "enumerate",
            Method::Sample => "sample",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Emit {
    FramePotential,
    Theory,
    Revival,
    Classify,
    DerivationCheck,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RevivalGrid {
    pub t_max: f64,
    pub step: f64,
}

impl RevivalGrid {
    pub fn times(&self) -> Vec<f64> {
        let count = (self.t_max / self.step).round() as usize;
        (0..=count).map(|i| i as f64 * self.step).collect()
    }
}

/// Fully resolved experiment description; echoed verbatim into summaries.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub hamiltonian: CouplingSpec,
    pub total_time: f64,
    pub prune_threshold: f64,
    pub branch_cap: usize,
    pub n_list: Vec<usize>,
    pub k_list: Vec<u32>,
    pub method: Method,
    pub samples: usize,
    pub seed: u64,
    pub r: f64,
    /// Emit the K ≥ 2 lower-bound columns.
    pub bound_column: bool,
    pub output_dir: PathBuf,
    pub emit: BTreeSet<Emit>,
    pub revival: RevivalGrid,
    pub derivation_dts: Vec<f64>,
    /// Grid size for the time-averaged leakage constant.
    pub evolved_points: usize,
}

impl ExperimentConfig {
    pub fn n_max(&self) -> usize {
        *self.n_list.last().expect("validated n_list is nonempty")
    }

    pub fn emits(&self, e: Emit) -> bool {
        self.emit.contains(&e)
    }

    /// Checks the invariants that do not depend on where the values came
    /// from; used for presets and after flag overrides.
    pub fn check(&self) -> Result<(), String> {
        let h = &self.hamiltonian;
        if h.n_s == 0 || h.n_b == 0 {
            return Err("n_s and n_b must be at least 1".into());
        }
        if h.n_s + h.n_b > MAX_QUBITS {
            return Err(format!("n_s + n_b = {} exceeds the limit of {MAX_QUBITS} qubits", h.n_s + h.n_b));
        }
        if !(self.total_time.is_finite() && self.total_time > 0.0) {
            return Err(format!("total_time must be positive, got {}", self.total_time));
        }
        check_n_list(&self.n_list)?;
        check_k_list(&self.k_list)?;
        if self.method == Method::Sample && self.samples < 2 {
            return Err(format!("samples must be at least 2, got {}", self.samples));
        }
        if !(self.r.is_finite() && self.r > 0.0) {
            return Err(format!("r must be positive, got {}", self.r));
        }
        if !(self.prune_threshold.is_finite() && (0.0..1.0).contains(&self.prune_threshold)) {
            return Err(format!("prune_threshold must lie in [0, 1), got {}", self.prune_threshold));
        }
        if self.branch_cap == 0 {
            return Err("branch_cap must be positive".into());
        }
        if !(self.revival.step > 0.0 && self.revival.t_max >= 2.0 * self.revival.step) {
            return Err("revival grid needs step > 0 and at least three points".into());
        }
        if self.derivation_dts.len() < 2 || self.derivation_dts.iter().any(|dt| !(*dt > 0.0)) {
            return Err("derivation dts need at least two positive entries".into());
        }
        if self.evolved_points < 2 {
            return Err("evolved_points must be at least 2".into());
        }
        Ok(())
    }
}

fn check_n_list(n_list: &[usize]) -> Result<(), String> {
    if n_list.is_empty() {
        return Err("n_list must not be empty".into());
    }
    if n_list[0] == 0 {
        return Err("n_list entries must be at least 1".into());
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err("n_list must be strictly increasing".into());
    }
    Ok(())
}

fn check_k_list(k_list: &[u32]) -> Result<(), String> {
    if k_list.is_empty() {
        return Err("k_list must not be empty".into());
    }
    if k_list.contains(&0) {
        return Err("k_list entries must be at least 1".into());
    }
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    hamiltonian: Option<Spanned<RawHamiltonian>>,
    protocol: Option<Spanned<RawProtocol>>,
    sweep: Option<Spanned<RawSweep>>,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    revival: RawRevival,
    #[serde(default)]
    derivation: RawDerivation,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHamiltonian {
    variant: Option<Spanned<Variant>>,
    n_s: Option<Spanned<usize>>,
    n_b: Option<Spanned<usize>>,
    j_x: Option<f64>,
    j_z: Option<f64>,
    j_zz: Option<f64>,
    j_yy: Option<f64>,
    j_xxx: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProtocol {
    total_time: Option<Spanned<f64>>,
    prune_threshold: Option<Spanned<f64>>,
    branch_cap: Option<Spanned<usize>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    n_list: Option<Spanned<Vec<usize>>>,
    /// Inclusive `[first, last]`.
    n_range: Option<Spanned<[usize; 2]>>,
    k_list: Option<Spanned<Vec<u32>>>,
    method: Option<Method>,
    samples: Option<Spanned<usize>>,
    seed: Option<u64>,
    r: Option<Spanned<f64>>,
    bound_column: Option<bool>,
    evolved_points: Option<Spanned<usize>>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    emit: Option<BTreeSet<Emit>>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRevival {
    t_max: Option<f64>,
    step: Option<f64>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDerivation {
    dts: Option<Spanned<Vec<f64>>>,
}

pub fn default_emit() -> BTreeSet<Emit> {
    [Emit::FramePotential, Emit::Theory, Emit::Classify].into_iter().collect()
}

pub fn default_revival() -> RevivalGrid {
    RevivalGrid { t_max: 10.0, step: 0.01 }
}

pub fn default_derivation_dts() -> Vec<f64> {
    vec![0.1, 0.05, 0.025]
}

struct Source<'a> {
    name: &'a str,
    text: &'a str,
}

impl Source<'_> {
    fn line(&self, offset: usize) -> usize {
        self.text[..offset.min(self.text.len())].matches('\n').count() + 1
    }

    fn err(&self, span: Range<usize>, message: impl Into<String>) -> ConfigError {
        ConfigError::At { source_name: self.name.to_string(), line: self.line(span.start), message: message.into() }
    }

    fn required<'v, T>(
        &self,
        value: &'v Option<Spanned<T>>,
        section: &Spanned<impl Sized>,
        key: &str,
    ) -> Result<&'v Spanned<T>, ConfigError> {
        value.as_ref().ok_or_else(|| self.err(section.span(), format!("missing required key `{key}`")))
    }
}

pub fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
    parse(&text, &path.display().to_string())
}

/// Parses and validates a config document. `source_name` prefixes error
/// messages.
pub fn parse(text: &str, source_name: &str) -> Result<ExperimentConfig, ConfigError> {
    let src = Source { name: source_name, text };
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| src.line(s.start)).unwrap_or(1);
        ConfigError::At { source_name: source_name.to_string(), line, message: e.message().trim().to_string() }
    })?;
    let whole = 0..text.len().max(1);
    let missing = |section: &str| src.err(0..0, format!("missing required section [{section}]"));

    let ham = raw.hamiltonian.as_ref().ok_or_else(|| missing("hamiltonian"))?;
    let h = ham.get_ref();
    let variant = h.variant.as_ref().map(|v| *v.get_ref()).unwrap_or(Variant::Ising);
    let n_s = src.required(&h.n_s, ham, "hamiltonian.n_s")?;
    let n_b = src.required(&h.n_b, ham, "hamiltonian.n_b")?;
    for (v, key) in [(n_s, "n_s"), (n_b, "n_b")] {
        if *v.get_ref() == 0 {
            return Err(src.err(v.span(), format!("`{key}` must be at least 1")));
        }
    }
    if n_s.get_ref() + n_b.get_ref() > MAX_QUBITS {
        return Err(src.err(n_b.span(), format!("n_s + n_b exceeds the limit of {MAX_QUBITS} qubits")));
    }
    let mut hamiltonian = CouplingSpec::with_defaults(variant, *n_s.get_ref(), *n_b.get_ref());
    hamiltonian.j_x = h.j_x.unwrap_or(hamiltonian.j_x);
    hamiltonian.j_z = h.j_z.unwrap_or(hamiltonian.j_z);
    hamiltonian.j_zz = h.j_zz.unwrap_or(hamiltonian.j_zz);
    hamiltonian.j_yy = h.j_yy.unwrap_or(hamiltonian.j_yy);
    hamiltonian.j_xxx = h.j_xxx.unwrap_or(hamiltonian.j_xxx);
    if variant == Variant::Xxx && hamiltonian.n_s + hamiltonian.n_b < 3 {
        return Err(src.err(ham.span(), "the xxx variant needs at least three sites"));
    }

    let proto = raw.protocol.as_ref().ok_or_else(|| missing("protocol"))?;
    let p = proto.get_ref();
    let total_time = src.required(&p.total_time, proto, "protocol.total_time")?;
    if !(total_time.get_ref().is_finite() && *total_time.get_ref() > 0.0) {
        return Err(src.err(total_time.span(), "`total_time` must be positive"));
    }
    let prune_threshold = match &p.prune_threshold {
        Some(t) if !(t.get_ref().is_finite() && (0.0..1.0).contains(t.get_ref())) => {
            return Err(src.err(t.span(), "`prune_threshold` must lie in [0, 1)"));
        }
        Some(t) => *t.get_ref(),
        None => DEFAULT_PRUNE_THRESHOLD,
    };
    let branch_cap = match &p.branch_cap {
        Some(c) if *c.get_ref() == 0 => return Err(src.err(c.span(), "`branch_cap` must be positive")),
        Some(c) => *c.get_ref(),
        None => DEFAULT_BRANCH_CAP,
    };

    let sweep = raw.sweep.as_ref().ok_or_else(|| missing("sweep"))?;
    let s = sweep.get_ref();
    let n_list = match (&s.n_list, &s.n_range) {
        (Some(_), Some(r)) => return Err(src.err(r.span(), "give either `n_list` or `n_range`, not both")),
        (Some(list), None) => {
            check_n_list(list.get_ref()).map_err(|m| src.err(list.span(), m))?;
            list.get_ref().clone()
        }
        (None, Some(r)) => {
            let [lo, hi] = *r.get_ref();
            if lo == 0 || hi < lo {
                return Err(src.err(r.span(), "`n_range` must be [first, last] with 1 <= first <= last"));
            }
            (lo..=hi).collect()
        }
        (None, None) => return Err(src.err(sweep.span(), "missing `n_list` or `n_range`")),
    };
    let k_list = match &s.k_list {
        Some(k) => {
            check_k_list(k.get_ref()).map_err(|m| src.err(k.span(), m))?;
            let mut ks = k.get_ref().clone();
            ks.sort_unstable();
            ks.dedup();
            ks
        }
        None => vec![1],
    };
    let method = s.method.unwrap_or(Method::Enumerate);
    let samples = match &s.samples {
        Some(m) if *m.get_ref() < 2 => return Err(src.err(m.span(), "`samples` must be at least 2")),
        Some(m) => *m.get_ref(),
        None => 1000,
    };
    let r = match &s.r {
        Some(r) if !(r.get_ref().is_finite() && *r.get_ref() > 0.0) => {
            return Err(src.err(r.span(), "`r` must be positive"));
        }
        Some(r) => *r.get_ref(),
        None => 0.1,
    };
    let evolved_points = match &s.evolved_points {
        Some(p) if *p.get_ref() < 2 => return Err(src.err(p.span(), "`evolved_points` must be at least 2")),
        Some(p) => *p.get_ref(),
        None => 201,
    };

    let revival = RevivalGrid {
        t_max: raw.revival.t_max.unwrap_or(default_revival().t_max),
        step: raw.revival.step.unwrap_or(default_revival().step),
    };
    let derivation_dts = match &raw.derivation.dts {
        Some(d) => {
            if d.get_ref().len() < 2 || d.get_ref().iter().any(|dt| !(*dt > 0.0)) {
                return Err(src.err(d.span(), "`dts` needs at least two positive entries"));
            }
            d.get_ref().clone()
        }
        None => default_derivation_dts(),
    };

    let cfg = ExperimentConfig {
        name: raw.name.unwrap_or_else(|| "custom".into()),
        hamiltonian,
        total_time: *total_time.get_ref(),
        prune_threshold,
        branch_cap,
        n_list,
        k_list,
        method,
        samples,
        seed: s.seed.unwrap_or(0),
        r,
        bound_column: s.bound_column.unwrap_or(false),
        output_dir: raw.output.dir.unwrap_or_else(|| PathBuf::from("out")),
        emit: raw.output.emit.unwrap_or_else(default_emit),
        revival,
        derivation_dts,
        evolved_points,
    };
    cfg.check().map_err(|m| src.err(whole, m))?;
    Ok(cfg)
}
