//! Closed-form predictions: Haar-circuit decay of the frame potential,
//! saturation and Zeno-onset measurement counts, Zeno-regime lower bounds,
//! and the Hamiltonian constants `c_H` that feed them.
//!
//! Dimensions (`dim_s = 2^n_s`, `dim_b = 2^n_b`) are passed as `f64` so the
//! formulas can be probed at very large bath sizes.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::frame_potential::haar_frame_potential_dim;
use crate::hamiltonian::{classify_alpha, HamiltonianSet, ZenoExponent};
use crate::linalg::{bath_block, embed_bath, identity, operator_norm, vector_norm_sqr, CMatrix, CVector, C64};
use crate::propagator::hermitian_eig;
use crate::protocol::{trajectory_rng, ProtocolConfig};
use crate::spin_hilbert::StateVector;

/// Bundle of the scalar inputs shared by the threshold formulas.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryParams {
    pub n_s: u32,
    pub n_b: u32,
    /// Saturation tolerance.
    pub r: f64,
    pub alpha: ZenoExponent,
    pub c_h: f64,
    pub k: u32,
}

impl TheoryParams {
    pub fn new(n_s: u32, n_b: u32, alpha: ZenoExponent, c_h: f64) -> Result<Self> {
        let p = Self { n_s, n_b, r: 0.1, alpha, c_h, k: 1 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_s == 0 || self.n_b == 0 {
            return invalid("theory needs n_s >= 1 and n_b >= 1");
        }
        if !(self.r > 0.0) {
            return invalid("saturation parameter r must be positive");
        }
        if !(self.c_h >= 0.0) {
            return invalid("c_H must be non-negative");
        }
        if self.k == 0 {
            return invalid("order K must be at least 1");
        }
        Ok(())
    }

    pub fn dim_s(&self) -> f64 {
        2f64.powi(self.n_s as i32)
    }

    pub fn dim_b(&self) -> f64 {
        2f64.powi(self.n_b as i32)
    }

    pub fn n_sat(&self) -> f64 {
        n_sat(self.n_s as f64, self.n_b as f64, self.r)
    }

    pub fn n_zeno(&self, total_time: f64) -> Result<f64> {
        n_zeno(total_time, self.n_s as f64, self.alpha, self.c_h)
    }

    pub fn n_gamma(&self, total_time: f64) -> Result<f64> {
        n_gamma(total_time, self.n_b as f64, self.alpha, self.c_h)
    }

    pub fn t_threshold(&self) -> Result<f64> {
        t_threshold(self.n_s as f64, self.n_b as f64, self.r, self.alpha, self.c_h)
    }
}

/// Saturation value of the first frame potential under Haar-random cycles.
pub fn q1(dim_s: f64, dim_b: f64) -> f64 {
    let ns2 = dim_s * dim_s;
    ns2 * (dim_b + 1.0) / (ns2 * dim_b + 1.0) * haar_frame_potential_dim(dim_s, 1)
}

/// Per-cycle contraction of `F^(1) - q1`.
pub fn hdt_f1_decay_ratio(dim_s: f64, dim_b: f64) -> f64 {
    let ns2 = dim_s * dim_s;
    (ns2 - 1.0) * dim_b / (ns2 * dim_b * dim_b - 1.0)
}

/// Expected `F^(1)` after `n` Haar-random cycles.
pub fn hdt_f1(dim_s: f64, dim_b: f64, n: f64) -> f64 {
    let ns2 = dim_s * dim_s;
    let prefactor = (dim_s - 1.0) * (dim_s * dim_b - 1.0) / (ns2 * dim_b + 1.0);
    q1(dim_s, dim_b) + prefactor * (n * hdt_f1_decay_ratio(dim_s, dim_b).ln()).exp()
}

/// `q_K = (1 + (2^K - 1)/N_b) F_Haar^(K)`, defined for `K ≥ 2`.
pub fn q_k(dim_s: f64, dim_b: f64, k: u32) -> Result<f64> {
    if k < 2 {
        return invalid(format!("q_K is defined for K >= 2, got K = {k}"));
    }
    Ok((1.0 + (2f64.powi(k as i32) - 1.0) / dim_b) * haar_frame_potential_dim(dim_s, k))
}

pub fn hdt_fk_decay_ratio(dim_s: f64, dim_b: f64) -> f64 {
    let ns2 = dim_s * dim_s;
    ns2 * dim_b / (ns2 * dim_b * dim_b - 1.0)
}

/// Higher-order lower bound `(1 - q_K) ρ^n - q_K`, taken as printed.
pub fn hdt_fk_bound(dim_s: f64, dim_b: f64, n: f64, k: u32) -> Result<f64> {
    let q = q_k(dim_s, dim_b, k)?;
    Ok((1.0 - q) * (n * hdt_fk_decay_ratio(dim_s, dim_b).ln()).exp() - q)
}

/// Conjectured variant `(1 - q_K) ρ^n + q_K` that saturates at `q_K` like
/// the first-order curve. Reported beside [`hdt_fk_bound`], never in its place.
pub fn hdt_fk_bound_plus(dim_s: f64, dim_b: f64, n: f64, k: u32) -> Result<f64> {
    let q = q_k(dim_s, dim_b, k)?;
    Ok((1.0 - q) * (n * hdt_fk_decay_ratio(dim_s, dim_b).ln()).exp() + q)
}

/// Measurements needed to reach saturation, `(n_s - log2 r) / n_b`; not rounded.
pub fn n_sat(n_s: f64, n_b: f64, r: f64) -> f64 {
    (n_s - r.log2()) / n_b
}

/// Zeno lower bound `exp(-c_H T^{α+1} / n^α)`.
pub fn zeno_bound(total_time: f64, n: f64, alpha: ZenoExponent, c_h: f64) -> f64 {
    let a = alpha.as_f64();
    (-c_h * total_time.powf(a + 1.0) / n.powf(a)).exp()
}

fn require_positive(c_h: f64) -> Result<()> {
    if c_h > 0.0 {
        Ok(())
    } else {
        Err(Error::UndefinedThreshold)
    }
}

/// Onset of the Zeno regime, `(c_H T^{α+1} / (n_s ln 2))^{1/α}`.
pub fn n_zeno(total_time: f64, n_s: f64, alpha: ZenoExponent, c_h: f64) -> Result<f64> {
    require_positive(c_h)?;
    let a = alpha.as_f64();
    Ok((c_h * total_time.powf(a + 1.0) / (n_s * LN_2)).powf(1.0 / a))
}

/// Minimum total time for saturation to precede the Zeno onset.
pub fn t_threshold(n_s: f64, n_b: f64, r: f64, alpha: ZenoExponent, c_h: f64) -> Result<f64> {
    require_positive(c_h)?;
    let a = alpha.as_f64();
    let num = (n_s - r.log2()).powf(a) * n_s * LN_2;
    Ok((num / (n_b.powf(a) * c_h)).powf(1.0 / (a + 1.0)))
}

/// Measurement count minimizing the frame potential when HDT and Zeno compete.
pub fn n_gamma(total_time: f64, n_b: f64, alpha: ZenoExponent, c_h: f64) -> Result<f64> {
    require_positive(c_h)?;
    let a = alpha.as_f64();
    Ok(total_time * (c_h / (n_b * LN_2)).powf(1.0 / (a + 1.0)))
}

/// How the leakage rate out of `φ₀` is averaged over system states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Averaging {
    /// Closed-form average over Haar-random system states.
    Haar,
    /// Sample mean over Haar-random system states.
    MonteCarlo { samples: usize, seed: u64 },
    /// Time average along `e^{-iH_s0 t}|ψ₀⟩` on `points` equally spaced
    /// times in `[0, t_max]`, starting from the all-zero system state.
    Evolved { t_max: f64, points: usize },
}

impl Averaging {
    pub fn tag(&self) -> &'static str {
        match self {
            Averaging::Haar => "haar",
            Averaging::MonteCarlo { .. } => "monte_carlo",
            Averaging::Evolved { .. } => "evolved",
        }
    }
}

/// `L = (I_s ⊗ Q_b) H (I_s ⊗ |φ₀⟩)` as a joint × system matrix, with
/// `Q_b = I_b - |φ₀⟩⟨φ₀|`.
fn leakage_operator(hs: &HamiltonianSet) -> CMatrix {
    let part = hs.partition();
    let (dim_s, dim_b) = (part.dim_s(), part.dim_b());
    let phi = hs.reset_state();
    let q_b = identity(dim_b) - phi * phi.adjoint();
    let q = embed_bath(&q_b, dim_s);
    let lift = identity(dim_s).kronecker(phi);
    q * hs.h() * lift
}

/// `c_H = 2 avg_ψ ‖(I_s ⊗ Q_b) H (ψ ⊗ φ₀)‖²`, the α = 1 Zeno constant.
pub fn c_h_low(hs: &HamiltonianSet, averaging: &Averaging) -> Result<f64> {
    Ok(c_h_low_with_error(hs, averaging)?.0)
}

/// [`c_h_low`] with the standard error of the mean (zero for exact modes).
pub fn c_h_low_with_error(hs: &HamiltonianSet, averaging: &Averaging) -> Result<(f64, f64)> {
    let leak = leakage_operator(hs);
    let part = hs.partition();
    let rate = |psi: &CVector| 2.0 * vector_norm_sqr(&(&leak * psi));
    match averaging {
        Averaging::Haar => {
            let frob: f64 = leak.iter().map(|z| z.norm_sqr()).sum();
            Ok((2.0 * frob / part.dim_s() as f64, 0.0))
        }
        Averaging::MonteCarlo { samples, seed } => {
            if *samples < 2 {
                return invalid("Monte Carlo averaging needs at least two samples");
            }
            let values: Vec<f64> = (0..*samples)
                .map(|i| rate(StateVector::random(part.n_s, &mut trajectory_rng(*seed, i as u64)).amplitudes()))
                .collect();
            Ok(mean_and_sem(&values))
        }
        Averaging::Evolved { t_max, points } => {
            if *points < 2 || !(t_max.is_finite() && *t_max > 0.0) {
                return invalid("evolved averaging needs t_max > 0 and at least two points");
            }
            let h_sys = bath_block(hs.h_s0(), part.dim_b(), 0, 0);
            let spectral = hermitian_eig(&h_sys)?;
            let psi0 = StateVector::zero(part.n_s);
            let values = (0..*points)
                .map(|k| {
                    let t = t_max * k as f64 / (*points - 1) as f64;
                    Ok(rate(spectral.evolve_state(&psi0, t)?.amplitudes()))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok((values.iter().sum::<f64>() / values.len() as f64, 0.0))
        }
    }
}

fn mean_and_sem(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Scalar `c` of a bath-only operator block `c · I_s`.
fn scalar_block(block: &CMatrix) -> C64 {
    block.trace() / C64::from(block.nrows() as f64)
}

/// `⟨φ_m| A |φ₀⟩` as a system operator, for the set's reset state `φ₀`.
fn block_to_reset(a: &CMatrix, dim_b: usize, m: usize, phi: &CVector) -> CMatrix {
    phi.iter()
        .enumerate()
        .fold(CMatrix::zeros(a.nrows() / dim_b, a.ncols() / dim_b), |acc, (b, &c)| {
            acc + bath_block(a, dim_b, m, b) * c
        })
}

/// α = 3 Zeno constant `c_H = (K/2) Σ_m |⟨φ_m|V|φ₀⟩|² μ_m²`, where `2μ_m` is
/// the spectral width of `⟨φ_m|H_c0|φ_m⟩`.
pub fn c_h_high(hs: &HamiltonianSet, k: u32) -> Result<f64> {
    if classify_alpha(hs) != ZenoExponent::Three {
        return Err(Error::Unsupported(
            "c_H for alpha = 3 needs H_c0 to commute with the bath projectors".into(),
        ));
    }
    let dim_b = hs.partition().dim_b();
    let phi = hs.reset_state();
    let mut sum = 0.0;
    for m in 0..dim_b {
        let coupling = scalar_block(&block_to_reset(hs.v(), dim_b, m, phi)).norm_sqr();
        if coupling == 0.0 {
            continue;
        }
        let diag = bath_block(hs.h_c0(), dim_b, m, m);
        let spectrum = hermitian_eig(&diag)?;
        let ev = spectrum.eigenvalues();
        let mu = (ev[ev.len() - 1] - ev[0]) / 2.0;
        sum += coupling * mu * mu;
    }
    Ok(0.5 * k as f64 * sum)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
    linear_slope(&pts)
}

/// Least-squares slope of `y` against `x`.
pub fn linear_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivationRow {
    pub dt: f64,
    /// `‖e^{-iHΔt} - e^{-iH_c0 Δt/2} e^{-i(H_s0+H_b)Δt} e^{-iH_c0 Δt/2}‖₂`
    pub trotter_err: f64,
    /// Exact single-cycle probability of leaving `φ₀`, summed over `m ≠ 0`.
    pub pm_exact: f64,
    /// Short-time prediction of the same probability.
    pub pm_perturbative: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivationReport {
    pub alpha: ZenoExponent,
    pub k: u32,
    pub c_h: f64,
    pub c_h_mode: &'static str,
    pub rows: Vec<DerivationRow>,
    pub trotter_exponent: f64,
    pub pm_exponent: f64,
    /// `|pm_perturbative / pm_exact - 1|` at the smallest `Δt`.
    pub pm_relative_error: f64,
}

/// Numerical check of the short-time expansions behind the Zeno bounds: the
/// symmetric split of `e^{-iHΔt}` and the leading-order leakage probability.
///
/// For α = 3 the leakage prediction is
/// `4 |⟨φ_m|V|φ₀⟩ / (E₀ - E_m)|² sin²((E₀ - E_m)Δt/2)` with `E_m` the
/// diagonal bath energies; for α = 1 it is `Δt² ‖⟨φ_m|H|φ₀⟩ψ‖²`.
pub fn zeno_derivation_check(
    hs: &HamiltonianSet,
    cfg: &ProtocolConfig,
    dts: &[f64],
    k: u32,
) -> Result<DerivationReport> {
    if dts.len() < 2 || dts.iter().any(|dt| !(dt.is_finite() && *dt > 0.0)) {
        return invalid("derivation check needs at least two positive time steps");
    }
    let part = hs.partition();
    if part != cfg.partition {
        return invalid("Hamiltonian and protocol partitions differ");
    }
    if part.total() > 6 {
        return invalid("derivation check is limited to at most six qubits");
    }
    let hs = hs.mean_field_shift(&cfg.reset_state)?.bath_split();
    let alpha = classify_alpha(&hs);
    let (c_h, c_h_mode) = match alpha {
        ZenoExponent::Three => (c_h_high(&hs, k)?, "high"),
        ZenoExponent::One => (c_h_low(&hs, &Averaging::Haar)?, "haar"),
    };

    let (dim_s, dim_b) = (part.dim_s(), part.dim_b());
    let full = hermitian_eig(hs.h())?;
    let coupling = hermitian_eig(hs.h_c0())?;
    let local = hermitian_eig(&(hs.h_s0() + hs.h_b()))?;
    let psi = cfg.initial_system.amplitudes();
    let joint = cfg.initial_joint();
    let phi = hs.reset_state();

    let bath_energy = |m: usize| scalar_block(&bath_block(hs.h_bm(), dim_b, m, m)).re;
    let e0: f64 = phi.iter().enumerate().map(|(b, c)| c.norm_sqr() * bath_energy(b)).sum();

    let rows = dts
        .iter()
        .map(|&dt| {
            let exact = full.propagator(dt);
            let half = coupling.propagator(dt / 2.0);
            let split = &half * local.propagator(dt) * &half;
            let trotter_err = operator_norm(&(&exact - split));

            let evolved = &exact * joint.amplitudes();
            let pm_exact: f64 = (1..dim_b)
                .map(|m| (0..dim_s).map(|s| evolved[s * dim_b + m].norm_sqr()).sum::<f64>())
                .sum();

            let pm_perturbative: f64 = (1..dim_b)
                .map(|m| match alpha {
                    ZenoExponent::Three => {
                        let v = scalar_block(&block_to_reset(hs.v(), dim_b, m, phi)).norm_sqr();
                        let gap = e0 - bath_energy(m);
                        if gap.abs() < 1e-12 {
                            v * dt * dt
                        } else {
                            4.0 * v / (gap * gap) * (gap * dt / 2.0).sin().powi(2)
                        }
                    }
                    ZenoExponent::One => {
                        let block = block_to_reset(hs.h(), dim_b, m, phi);
                        dt * dt * vector_norm_sqr(&(block * psi))
                    }
                })
                .sum();
            Ok(DerivationRow { dt, trotter_err, pm_exact, pm_perturbative })
        })
        .collect::<Result<Vec<_>>>()?;

    let xs: Vec<f64> = rows.iter().map(|r| r.dt).collect();
    let trotter_exponent = loglog_slope(&xs, &rows.iter().map(|r| r.trotter_err).collect::<Vec<_>>());
    let pm_exponent = if rows.iter().all(|r| r.pm_exact > 0.0) {
        loglog_slope(&xs, &rows.iter().map(|r| r.pm_exact).collect::<Vec<_>>())
    } else {
        f64::NAN
    };
    let smallest = rows
        .iter()
        .min_by(|a, b| a.dt.total_cmp(&b.dt))
        .expect("at least two rows");
    let pm_relative_error = if smallest.pm_exact > 0.0 {
        (smallest.pm_perturbative / smallest.pm_exact - 1.0).abs()
    } else {
        f64::NAN
    };
    Ok(DerivationReport { alpha, k, c_h, c_h_mode, rows, trotter_exponent, pm_exponent, pm_relative_error })
}
