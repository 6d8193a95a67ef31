//! Frame potentials `F^(K) = Σ p_z p_z' |⟨ψ_z|ψ_z'⟩|^{2K}` of pure-state
//! ensembles: exact double sums over enumerated records, an unbiased
//! pair estimator over i.i.d. samples, and the Haar value.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::C64;
use crate::protocol::{Ensemble, EnsembleKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    Exact,
    PairEstimator,
}

impl std::fmt::Display for EstimateMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EstimateMethod::Exact => "exact",
            EstimateMethod::PairEstimator => "pair_estimator",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FramePotentialEstimate {
    pub k: u32,
    pub value: f64,
    /// Zero for exact sums; delete-one jackknife for the pair estimator.
    pub std_error: f64,
    pub method: EstimateMethod,
    pub samples: Option<usize>,
    pub truncated_mass: f64,
    /// Pruned branches can shift the value by at most this much.
    pub truncation_bound: f64,
}

fn overlap_sqr(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>().norm_sqr()
}

fn check_orders(ks: &[u32]) -> Result<()> {
    if ks.is_empty() || ks.contains(&0) {
        return invalid("frame potential orders must be a nonempty list of K >= 1");
    }
    Ok(())
}

fn states(e: &Ensemble) -> Vec<&[C64]> {
    e.members.iter().map(|t| t.final_state.amplitudes().as_slice()).collect()
}

/// Double sum over every pair of kept branches, all orders in one pass.
pub fn exact_frame_potentials(e: &Ensemble, ks: &[u32]) -> Result<Vec<FramePotentialEstimate>> {
    check_orders(ks)?;
    if e.kind != EnsembleKind::Exact {
        return invalid("exact frame potential needs an enumerated ensemble");
    }
    if e.is_empty() {
        return invalid("ensemble is empty");
    }
    let psi = states(e);
    let p: Vec<f64> = e.members.iter().map(|t| t.probability).collect();
    let rows: Vec<Vec<f64>> = (0..psi.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![0.0; ks.len()];
            let diag = overlap_sqr(psi[i], psi[i]);
            for (a, &k) in acc.iter_mut().zip(ks) {
                *a += p[i] * p[i] * diag.powi(k as i32);
            }
            for j in i + 1..psi.len() {
                let w = overlap_sqr(psi[i], psi[j]);
                let weight = 2.0 * p[i] * p[j];
                for (a, &k) in acc.iter_mut().zip(ks) {
                    *a += weight * w.powi(k as i32);
                }
            }
            acc
        })
        .collect();
    Ok(ks
        .iter()
        .enumerate()
        .map(|(slot, &k)| FramePotentialEstimate {
            k,
            value: rows.iter().map(|r| r[slot]).sum(),
            std_error: 0.0,
            method: EstimateMethod::Exact,
            samples: None,
            truncated_mass: e.truncated_mass,
            truncation_bound: 2.0 * e.truncated_mass,
        })
        .collect())
}

pub fn exact_frame_potential(e: &Ensemble, k: u32) -> Result<FramePotentialEstimate> {
    Ok(exact_frame_potentials(e, &[k])?.remove(0))
}

/// Fixed number of work slices, so the reduction order (and every bit of
/// the result) is independent of the thread count.
const PAIR_SLICES: usize = 64;

/// `out[i][slot] = Σ_{j≠i} |⟨ψ_i|ψ_j⟩|^{2 ks[slot]}`, visiting each unordered
/// pair once. Rows are dealt round-robin to slices to balance the triangle.
fn pair_row_sums(psi: &[&[C64]], ks: &[u32]) -> Vec<Vec<f64>> {
    let m = psi.len();
    let width = ks.len();
    let partials: Vec<Vec<f64>> = (0..PAIR_SLICES.min(m))
        .into_par_iter()
        .map(|slice| {
            let mut acc = vec![0.0; m * width];
            for i in (slice..m).step_by(PAIR_SLICES) {
                for j in i + 1..m {
                    let w = overlap_sqr(psi[i], psi[j]);
                    for (slot, &k) in ks.iter().enumerate() {
                        let v = w.powi(k as i32);
                        acc[i * width + slot] += v;
                        acc[j * width + slot] += v;
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; m * width];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    total.chunks(width).map(<[f64]>::to_vec).collect()
}

/// U-statistic `1/(M(M-1)) Σ_{i≠j} |⟨ψ_i|ψ_j⟩|^{2K}` over i.i.d. draws.
///
/// Two independent draws coincide on record `z` with probability `p_z²`, so
/// this is unbiased for the full double sum including its diagonal. The
/// standard error is the delete-one jackknife, which needs `M ≥ 3`; with two
/// samples it is reported as NaN.
pub fn sampled_frame_potentials(e: &Ensemble, ks: &[u32]) -> Result<Vec<FramePotentialEstimate>> {
    check_orders(ks)?;
    let m = e.len();
    if m < 2 {
        return invalid(format!("pair estimator needs at least two samples, got {m}"));
    }
    let psi = states(e);
    let row_sums = pair_row_sums(&psi, ks);

    let mf = m as f64;
    Ok(ks
        .iter()
        .enumerate()
        .map(|(slot, &k)| {
            let total: f64 = row_sums.iter().map(|r| r[slot]).sum();
            let value = total / (mf * (mf - 1.0));
            let std_error = if m < 3 {
                f64::NAN
            } else {
                let denom = (mf - 1.0) * (mf - 2.0);
                let loo: Vec<f64> = row_sums.iter().map(|r| (total - 2.0 * r[slot]) / denom).collect();
                let mean = loo.iter().sum::<f64>() / mf;
                let ss: f64 = loo.iter().map(|x| (x - mean).powi(2)).sum();
                ((mf - 1.0) / mf * ss).sqrt()
            };
            FramePotentialEstimate {
                k,
                value,
                std_error,
                method: EstimateMethod::PairEstimator,
                samples: Some(m),
                truncated_mass: e.truncated_mass,
                truncation_bound: 2.0 * e.truncated_mass,
            }
        })
        .collect())
}

pub fn sampled_frame_potential(e: &Ensemble, k: u32) -> Result<FramePotentialEstimate> {
    Ok(sampled_frame_potentials(e, &[k])?.remove(0))
}

/// Haar frame potential on a Hilbert space of dimension `dim`:
/// `(N-1)! K! / (N+K-1)! = Π_{j=1..K} j / (N+j-1)`.
pub fn haar_frame_potential_dim(dim: f64, k: u32) -> f64 {
    // a product of factors in (0, 1]: no overflow, and exactly 1/N at K = 1
    (1..=k).fold(1.0, |acc, j| acc * (j as f64 / (dim + j as f64 - 1.0)))
}

/// Haar frame potential for `n_s` system qubits.
pub fn haar_frame_potential(n_s: u32, k: u32) -> f64 {
    haar_frame_potential_dim(2f64.powi(n_s as i32), k)
}
