//! Sweeps over measurement counts and frame-potential orders, with the
//! matching closed-form curves and thresholds.

use std::time::Instant;

use hdt_core::frame_potential::{exact_frame_potentials, haar_frame_potential, sampled_frame_potentials};
use hdt_core::hamiltonian::{classify_alpha, is_integrable};
use hdt_core::protocol::revival_curve_with;
use hdt_core::theory::{
    self, c_h_high, c_h_low, hdt_f1, hdt_fk_bound, hdt_fk_bound_plus, zeno_bound, zeno_derivation_check,
    Averaging, DerivationReport,
};
use hdt_core::{
    hermitian_eig, CouplingSpec, Error, HamiltonianSet, Monitor, ProtocolConfig, Result, Spectral, StateVector,
    Variant, ZenoExponent,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Emit, ExperimentConfig, Method};

/// Register limit of the derivation check.
const DERIVATION_MAX_QUBITS: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Constants {
    pub alpha: u32,
    /// Largest off-diagonal bath block of `H_c0`; zero means α = 3.
    pub commutator_residual: f64,
    pub c_h_low_haar: f64,
    pub c_h_low_evolved: f64,
    /// α = 3 constant at K = 1; absent when the commutator condition fails.
    pub c_h_high: Option<f64>,
    /// Only defined for the Ising chain.
    pub integrable: Option<bool>,
}

impl Constants {
    pub fn compute(hs: &HamiltonianSet, spec: &CouplingSpec, cfg: &ExperimentConfig) -> Result<Self> {
        let alpha = classify_alpha(hs);
        let c_h_high = match alpha {
            ZenoExponent::Three => Some(c_h_high(hs, 1)?),
            ZenoExponent::One => None,
        };
        let evolved = Averaging::Evolved { t_max: cfg.total_time, points: cfg.evolved_points };
        Ok(Self {
            alpha: alpha.value(),
            commutator_residual: hs.projector_commutator_residual(),
            c_h_low_haar: c_h_low(hs, &Averaging::Haar)?,
            c_h_low_evolved: c_h_low(hs, &evolved)?,
            c_h_high,
            integrable: (spec.variant == Variant::Ising).then(|| is_integrable(spec)).transpose()?,
        })
    }

    pub fn zeno_exponent(&self) -> ZenoExponent {
        ZenoExponent::from_value(self.alpha).expect("alpha is 1 or 3")
    }

    /// Constant entering the Zeno bound at order `k`: the α = 3 value scales
    /// with K, the α = 1 value is the Haar-averaged leakage rate.
    pub fn c_h(&self, k: u32) -> f64 {
        match self.c_h_high {
            Some(c) => c * k as f64,
            None => self.c_h_low_haar,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub k: u32,
    pub delta_t: f64,
    pub f_value: Option<f64>,
    pub f_err: Option<f64>,
    pub truncated_mass: Option<f64>,
    pub theory_hdt: Option<f64>,
    pub theory_hdt_plus: Option<f64>,
    pub theory_zeno: f64,
    pub alpha: u32,
    pub c_h: f64,
    pub haar_baseline: f64,
    pub method: Option<Method>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

struct Measured {
    k: u32,
    value: f64,
    err: f64,
    truncated: f64,
}

fn theory_row(cfg: &ExperimentConfig, consts: &Constants, n: usize, k: u32) -> SweepRow {
    let h = &cfg.hamiltonian;
    let (dim_s, dim_b) = ((1u64 << h.n_s) as f64, (1u64 << h.n_b) as f64);
    let nf = n as f64;
    let (hdt, hdt_plus) = if k == 1 {
        (Some(hdt_f1(dim_s, dim_b, nf)), None)
    } else {
        (hdt_fk_bound(dim_s, dim_b, nf, k).ok(), hdt_fk_bound_plus(dim_s, dim_b, nf, k).ok())
    };
    let c_h = consts.c_h(k);
    let theory_zeno = if n == 0 { 0.0 } else { zeno_bound(cfg.total_time, nf, consts.zeno_exponent(), c_h) };
    SweepRow {
        n,
        k,
        delta_t: if n == 0 { f64::INFINITY } else { cfg.total_time / nf },
        f_value: None,
        f_err: None,
        truncated_mass: None,
        theory_hdt: hdt,
        theory_hdt_plus: hdt_plus,
        theory_zeno,
        alpha: consts.alpha,
        c_h,
        haar_baseline: haar_frame_potential(h.n_s as u32, k),
        method: None,
        samples: None,
        seed: None,
    }
}

pub fn protocol_for(cfg: &ExperimentConfig, n: usize) -> Result<ProtocolConfig> {
    let mut p = ProtocolConfig::new(cfg.total_time, n, cfg.hamiltonian.partition()?)?
        .with_prune_threshold(cfg.prune_threshold)?;
    p.branch_cap = cfg.branch_cap;
    Ok(p)
}

/// Frame potentials at one measurement count. In enumerate mode K = 1 is the
/// purity of the record-averaged state (exact, nothing pruned); higher
/// orders need the branch list.
fn measure(spectral: &Spectral, cfg: &ExperimentConfig, n: usize) -> Result<Vec<Measured>> {
    let pcfg = protocol_for(cfg, n)?;
    let monitor = Monitor::new(spectral, &pcfg)?;
    match cfg.method {
        Method::Enumerate => {
            let mut out = Vec::with_capacity(cfg.k_list.len());
            if cfg.k_list.contains(&1) {
                out.push(Measured { k: 1, value: monitor.first_frame_potential(&pcfg), err: 0.0, truncated: 0.0 });
            }
            let higher: Vec<u32> = cfg.k_list.iter().copied().filter(|&k| k >= 2).collect();
            if !higher.is_empty() {
                let ensemble = monitor.enumerate(&pcfg)?;
                for est in exact_frame_potentials(&ensemble, &higher)? {
                    out.push(Measured { k: est.k, value: est.value, err: 0.0, truncated: est.truncated_mass });
                }
            }
            Ok(out)
        }
        Method::Sample => {
            let ensemble = monitor.sample_ensemble(&pcfg, cfg.samples, cfg.seed)?;
            Ok(sampled_frame_potentials(&ensemble, &cfg.k_list)?
                .into_iter()
                .map(|est| Measured { k: est.k, value: est.value, err: est.std_error, truncated: 0.0 })
                .collect())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Thresholds {
    pub n_sat: f64,
    pub n_zeno: Option<f64>,
    pub n_gamma: Option<f64>,
    pub t_threshold: Option<f64>,
    /// `n_zeno` evaluated at `T = t_threshold`; equals `n_sat` by construction.
    pub n_zeno_at_t_threshold: Option<f64>,
}

impl Thresholds {
    pub fn compute(cfg: &ExperimentConfig, consts: &Constants) -> Self {
        let (n_s, n_b) = (cfg.hamiltonian.n_s as f64, cfg.hamiltonian.n_b as f64);
        let (alpha, c_h) = (consts.zeno_exponent(), consts.c_h(1));
        let t_threshold = theory::t_threshold(n_s, n_b, cfg.r, alpha, c_h).ok();
        Self {
            n_sat: theory::n_sat(n_s, n_b, cfg.r),
            n_zeno: theory::n_zeno(cfg.total_time, n_s, alpha, c_h).ok(),
            n_gamma: theory::n_gamma(cfg.total_time, n_b, alpha, c_h).ok(),
            t_threshold,
            n_zeno_at_t_threshold: t_threshold.and_then(|t| theory::n_zeno(t, n_s, alpha, c_h).ok()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Extremum {
    pub n: usize,
    pub value: f64,
    pub interior: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Plateau {
    pub first_n: usize,
    pub last_n: usize,
    /// `(1 + r) · min F^(1)`.
    pub threshold: f64,
    pub interior: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Upturn {
    pub n: usize,
    pub delta_t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FirstOrderShape {
    pub argmin: Extremum,
    pub plateau: Plateau,
    /// First n at which F^(1) rises relative to the previous grid point.
    pub first_upturn: Option<Upturn>,
}

impl FirstOrderShape {
    pub fn from_rows(rows: &[SweepRow], total_time: f64, r: f64) -> Option<Self> {
        let pts: Vec<(usize, f64)> =
            rows.iter().filter(|row| row.k == 1).filter_map(|row| Some((row.n, row.f_value?))).collect();
        if pts.is_empty() {
            return None;
        }
        let (imin, &(n_min, f_min)) =
            pts.iter().enumerate().min_by(|a, b| a.1 .1.total_cmp(&b.1 .1)).expect("nonempty");
        let last = pts.len() - 1;
        let threshold = (1.0 + r) * f_min;
        let mut lo = imin;
        while lo > 0 && pts[lo - 1].1 <= threshold {
            lo -= 1;
        }
        let mut hi = imin;
        while hi < last && pts[hi + 1].1 <= threshold {
            hi += 1;
        }
        let first_upturn = pts
            .windows(2)
            .find(|w| w[1].1 > w[0].1)
            .map(|w| Upturn { n: w[1].0, delta_t: total_time / w[1].0 as f64 });
        Some(Self {
            argmin: Extremum { n: n_min, value: f_min, interior: imin > 0 && imin < last },
            plateau: Plateau { first_n: pts[lo].0, last_n: pts[hi].0, threshold, interior: lo > 0 && hi < last },
            first_upturn,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RevivalSummary {
    pub first_minimum: Option<f64>,
    pub first_revival: Option<f64>,
    pub xi_at_zero: f64,
    pub xi_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RevivalOutput {
    pub points: Vec<(f64, f64)>,
    pub summary: RevivalSummary,
}

/// Return fidelity of the all-zero joint state under the full Hamiltonian.
pub fn revival(spectral: &Spectral, cfg: &ExperimentConfig) -> Result<RevivalOutput> {
    let psi0 = StateVector::zero(cfg.hamiltonian.n_s + cfg.hamiltonian.n_b);
    let curve = revival_curve_with(spectral, &psi0, &cfg.revival.times())?;
    let summary = RevivalSummary {
        first_minimum: curve.first_minimum,
        first_revival: curve.first_revival,
        xi_at_zero: curve.points[0].1,
        xi_max: curve.points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
    };
    Ok(RevivalOutput { points: curve.points, summary })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivationOutput {
    /// Register the check ran on; shrunk to at most six qubits.
    pub n_s: usize,
    pub n_b: usize,
    pub report: DerivationReport,
}

pub fn derivation(cfg: &ExperimentConfig) -> Result<DerivationOutput> {
    let mut spec = cfg.hamiltonian.clone();
    spec.n_b = spec.n_b.min(2);
    spec.n_s = spec.n_s.min(DERIVATION_MAX_QUBITS - spec.n_b);
    let hs = HamiltonianSet::build(&spec)?;
    let pcfg = ProtocolConfig::new(cfg.total_time, 1, spec.partition()?)?;
    let report = zeno_derivation_check(&hs, &pcfg, &cfg.derivation_dts, 1)?;
    Ok(DerivationOutput { n_s: spec.n_s, n_b: spec.n_b, report })
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub software: &'static str,
    pub version: &'static str,
    pub wall_time_seconds: f64,
    pub time_unit: &'static str,
    pub config: ExperimentConfig,
    pub thresholds: Thresholds,
    pub constants: Constants,
    pub first_order: Option<FirstOrderShape>,
    pub revival: Option<RevivalSummary>,
    pub derivation: Option<DerivationOutput>,
}

pub const TIME_UNIT_NOTE: &str =
    "dimensionless time with hbar = 1 and unit couplings; no physical (microsecond) scale is implied";

pub struct RunOutput {
    pub rows: Vec<SweepRow>,
    pub summary: Summary,
    pub revival_points: Option<Vec<(f64, f64)>>,
}

fn summary(
    cfg: &ExperimentConfig,
    consts: Constants,
    rows: &[SweepRow],
    revival: Option<RevivalSummary>,
    derivation: Option<DerivationOutput>,
    started: Instant,
) -> Summary {
    Summary {
        software: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        time_unit: TIME_UNIT_NOTE,
        config: cfg.clone(),
        thresholds: Thresholds::compute(cfg, &consts),
        constants: consts,
        first_order: FirstOrderShape::from_rows(rows, cfg.total_time, cfg.r),
        revival,
        derivation,
    }
}

/// Full sweep: one propagator per n, all orders per n, in parallel over n.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let started = Instant::now();
    cfg.check().map_err(Error::InvalidArgument)?;
    let hs = HamiltonianSet::build(&cfg.hamiltonian)?;
    let spectral = hermitian_eig(hs.h())?;
    let consts = Constants::compute(&hs, &cfg.hamiltonian, cfg)?;

    let per_n: Vec<Vec<Measured>> = if cfg.emits(Emit::FramePotential) {
        cfg.n_list.par_iter().map(|&n| measure(&spectral, cfg, n)).collect::<Result<_>>()?
    } else {
        cfg.n_list.iter().map(|_| Vec::new()).collect()
    };
    let sampled = cfg.method == Method::Sample;
    let mut rows = Vec::with_capacity(cfg.n_list.len() * cfg.k_list.len());
    for (&n, measured) in cfg.n_list.iter().zip(&per_n) {
        for &k in &cfg.k_list {
            let mut row = theory_row(cfg, &consts, n, k);
            if let Some(m) = measured.iter().find(|m| m.k == k) {
                row.f_value = Some(m.value);
                row.f_err = Some(m.err);
                row.truncated_mass = Some(m.truncated);
                row.method = Some(cfg.method);
                row.samples = sampled.then_some(cfg.samples);
                row.seed = sampled.then_some(cfg.seed);
            }
            rows.push(row);
        }
    }

    let revival_out = if cfg.emits(Emit::Revival) { Some(revival(&spectral, cfg)?) } else { None };
    let derivation_out = if cfg.emits(Emit::DerivationCheck) { Some(derivation(cfg)?) } else { None };
    let (revival_points, revival_summary) = match revival_out {
        Some(r) => (Some(r.points), Some(r.summary)),
        None => (None, None),
    };
    let summary = summary(cfg, consts, &rows, revival_summary, derivation_out, started);
    Ok(RunOutput { rows, summary, revival_points })
}

/// Closed-form curves and thresholds only; includes `n = 0`.
pub fn theory_only(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let started = Instant::now();
    cfg.check().map_err(Error::InvalidArgument)?;
    let hs = HamiltonianSet::build(&cfg.hamiltonian)?;
    let consts = Constants::compute(&hs, &cfg.hamiltonian, cfg)?;
    let ns = std::iter::once(0).chain(cfg.n_list.iter().copied());
    let rows: Vec<SweepRow> =
        ns.flat_map(|n| cfg.k_list.iter().map(move |&k| (n, k))).map(|(n, k)| theory_row(cfg, &consts, n, k)).collect();
    let summary = summary(cfg, consts, &rows, None, None, started);
    Ok(RunOutput { rows, summary, revival_points: None })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub variant: Variant,
    pub constants: Constants,
}

pub fn classify(cfg: &ExperimentConfig) -> Result<Classification> {
    let hs = HamiltonianSet::build(&cfg.hamiltonian)?;
    Ok(Classification { variant: cfg.hamiltonian.variant, constants: Constants::compute(&hs, &cfg.hamiltonian, cfg)? })
}
