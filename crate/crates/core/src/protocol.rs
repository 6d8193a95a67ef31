//! The evolve → measure → reset engine.
//!
//! With the bath reset to `φ₀` after every cycle, one cycle acts on the
//! system alone through the Kraus operators
//! `K_m = (I_s ⊗ ⟨φ_m|) U(Δt) (I_s ⊗ |φ₀⟩)`, so branch amplitudes are
//! propagated on the system register only. Unnormalized branch vectors carry
//! their Born probability as their squared norm.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hamiltonian::HamiltonianSet;
use crate::linalg::{matmul, matmul_adj, vector_norm_sqr, CMatrix, CVector};
use crate::propagator::{evolve, hermitian_eig, Spectral};
use crate::spin_hilbert::{
    attach_reset_bath, fidelity, measure_bath_distribution, QubitPartition, StateVector,
    ZERO_PROBABILITY,
};

pub const DEFAULT_PRUNE_THRESHOLD: f64 = 1e-10;
pub const DEFAULT_BRANCH_CAP: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolConfig {
    pub total_time: f64,
    pub n: usize,
    pub partition: QubitPartition,
    pub reset_state: StateVector,
    pub initial_system: StateVector,
    pub prune_threshold: f64,
    pub branch_cap: usize,
}

impl ProtocolConfig {
    /// All-zero initial and reset states, default pruning and branch cap.
    pub fn new(total_time: f64, n: usize, partition: QubitPartition) -> Result<Self> {
        let cfg = Self {
            total_time,
            n,
            partition,
            reset_state: StateVector::zero(partition.n_b),
            initial_system: StateVector::zero(partition.n_s),
            prune_threshold: DEFAULT_PRUNE_THRESHOLD,
            branch_cap: DEFAULT_BRANCH_CAP,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_prune_threshold(mut self, threshold: f64) -> Result<Self> {
        self.prune_threshold = threshold;
        self.validate()?;
        Ok(self)
    }

    pub fn with_cycles(&self, n: usize) -> Result<Self> {
        let cfg = Self { n, ..self.clone() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_initial_system(mut self, psi: StateVector) -> Result<Self> {
        self.initial_system = psi;
        self.validate()?;
        Ok(self)
    }

    pub fn dt(&self) -> f64 {
        self.total_time / self.n as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return invalid("number of measurement cycles must be at least 1");
        }
        let dt = self.dt();
        if !dt.is_finite() || dt <= 0.0 {
            return invalid(format!("time step T/n = {dt} must be finite and positive"));
        }
        if !(self.prune_threshold >= 0.0) {
            return invalid("prune threshold must be non-negative");
        }
        if self.reset_state.num_qubits() != self.partition.n_b || !self.reset_state.is_normalized() {
            return invalid("reset state must be a normalized bath state");
        }
        if self.initial_system.num_qubits() != self.partition.n_s
            || !self.initial_system.is_normalized()
        {
            return invalid("initial state must be a normalized system state");
        }
        Ok(())
    }

    /// `ψ₀ ⊗ φ₀`
    pub fn initial_joint(&self) -> StateVector {
        self.initial_system.tensor(&self.reset_state)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub outcomes: Vec<u32>,
    pub probability: f64,
    pub final_state: StateVector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    Exact,
    Sampled,
}

#[derive(Clone, Debug)]
pub struct Ensemble {
    pub kind: EnsembleKind,
    pub members: Vec<Trajectory>,
    /// Probability mass of pruned branches (exact ensembles only).
    pub truncated_mass: f64,
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn kept_mass(&self) -> f64 {
        self.members.iter().map(|t| t.probability).sum()
    }
}

/// Kraus form of one measure-and-reset cycle, built for a fixed `Δt`.
#[derive(Clone, Debug)]
pub struct Monitor {
    partition: QubitPartition,
    kraus: Vec<CMatrix>,
}

struct Branch {
    outcomes: Vec<u32>,
    vector: CVector,
    probability: f64,
}

impl Monitor {
    /// Cycle operators for the config's `Δt`, from a cached spectrum.
    pub fn new(spectral: &Spectral, cfg: &ProtocolConfig) -> Result<Self> {
        Self::from_unitary(&spectral.propagator(cfg.dt()), cfg)
    }

    pub fn from_unitary(u: &CMatrix, cfg: &ProtocolConfig) -> Result<Self> {
        let part = cfg.partition;
        let (dim_s, dim_b) = (part.dim_s(), part.dim_b());
        if u.shape() != (part.dim(), part.dim()) {
            return invalid(format!("unitary shape {:?} does not match {} qubits", u.shape(), part.total()));
        }
        let phi = cfg.reset_state.amplitudes();
        let kraus = (0..dim_b)
            .map(|m| {
                CMatrix::from_fn(dim_s, dim_s, |s, sp| {
                    phi.iter()
                        .enumerate()
                        .map(|(b, &c)| u[(s * dim_b + m, sp * dim_b + b)] * c)
                        .sum()
                })
            })
            .collect();
        Ok(Self { partition: part, kraus })
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn partition(&self) -> QubitPartition {
        self.partition
    }

    fn children(&self, branch: &Branch, threshold: f64, truncated: &mut f64) -> Vec<Branch> {
        let mut out = Vec::with_capacity(self.kraus.len());
        for (m, k) in self.kraus.iter().enumerate() {
            let vector = k * &branch.vector;
            let probability = vector_norm_sqr(&vector);
            if probability < threshold || probability < ZERO_PROBABILITY * branch.probability || probability == 0.0 {
                *truncated += probability;
                continue;
            }
            let mut outcomes = branch.outcomes.clone();
            outcomes.push(m as u32);
            out.push(Branch { outcomes, vector, probability });
        }
        out
    }

    /// Depth-first enumeration of every measurement record whose accumulated
    /// probability stays at or above `cfg.prune_threshold`.
    pub fn enumerate(&self, cfg: &ProtocolConfig) -> Result<Ensemble> {
        let threshold = cfg.prune_threshold;
        let root = Branch {
            outcomes: Vec::with_capacity(cfg.n),
            vector: cfg.initial_system.amplitudes().clone(),
            probability: 1.0,
        };

        // Breadth-first split into independent subtrees for the workers.
        let target = 4 * rayon::current_num_threads().max(1);
        let mut frontier = vec![root];
        let mut truncated = 0.0;
        let mut depth = 0;
        while depth < cfg.n && frontier.len() < target {
            let mut next = Vec::new();
            for b in &frontier {
                next.extend(self.children(b, threshold, &mut truncated));
            }
            frontier = next;
            depth += 1;
            if frontier.len() > cfg.branch_cap {
                return Err(Error::ResourceLimit { cap: cfg.branch_cap });
            }
        }

        let live = AtomicUsize::new(0);
        let subtrees: Vec<Result<(Vec<Trajectory>, f64)>> = frontier
            .into_par_iter()
            .map(|start| self.depth_first(start, depth, cfg, &live))
            .collect();

        let mut members = Vec::new();
        for sub in subtrees {
            let (leaves, lost) = sub?;
            members.extend(leaves);
            truncated += lost;
        }
        Ok(Ensemble { kind: EnsembleKind::Exact, members, truncated_mass: truncated })
    }

    fn depth_first(
        &self,
        start: Branch,
        start_depth: usize,
        cfg: &ProtocolConfig,
        live: &AtomicUsize,
    ) -> Result<(Vec<Trajectory>, f64)> {
        let mut leaves = Vec::new();
        let mut truncated = 0.0;
        let mut stack = vec![(start, start_depth)];
        while let Some((branch, depth)) = stack.pop() {
            if depth == cfg.n {
                if live.fetch_add(1, Ordering::Relaxed) >= cfg.branch_cap {
                    return Err(Error::ResourceLimit { cap: cfg.branch_cap });
                }
                let final_state = StateVector::from_amplitudes(branch.vector.unscale(branch.probability.sqrt()))?;
                leaves.push(Trajectory {
                    outcomes: branch.outcomes,
                    probability: branch.probability,
                    final_state,
                });
                continue;
            }
            let kids = self.children(&branch, cfg.prune_threshold, &mut truncated);
            // reversed so outcome 0 is explored first
            stack.extend(kids.into_iter().rev().map(|k| (k, depth + 1)));
        }
        Ok((leaves, truncated))
    }

    /// One trajectory with outcomes drawn from the conditional Born rule.
    pub fn sample<R: Rng + ?Sized>(&self, cfg: &ProtocolConfig, rng: &mut R) -> Trajectory {
        let mut state = cfg.initial_system.amplitudes().clone();
        let mut outcomes = Vec::with_capacity(cfg.n);
        let mut probability = 1.0;
        for _ in 0..cfg.n {
            let candidates: Vec<(CVector, f64)> = self
                .kraus
                .iter()
                .map(|k| {
                    let w = k * &state;
                    let p = vector_norm_sqr(&w);
                    (w, p)
                })
                .collect();
            let total: f64 = candidates.iter().map(|(_, p)| p).sum();
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = candidates.len() - 1;
            for (m, (_, p)) in candidates.iter().enumerate() {
                acc += p;
                if u < acc && *p > 0.0 {
                    chosen = m;
                    break;
                }
            }
            // guard against landing on a zero-weight tail through rounding
            while candidates[chosen].1 == 0.0 {
                chosen -= 1;
            }
            let (w, p) = &candidates[chosen];
            state = w.unscale(p.sqrt());
            probability *= p / total;
            outcomes.push(chosen as u32);
        }
        Trajectory {
            outcomes,
            probability,
            final_state: StateVector::from_amplitudes(state).expect("system dimension is a power of two"),
        }
    }

    /// `m` i.i.d. trajectories; trajectory `i` uses ChaCha stream `i` of `seed`.
    pub fn sample_ensemble(&self, cfg: &ProtocolConfig, m: usize, seed: u64) -> Result<Ensemble> {
        if m < 2 {
            return invalid(format!("need at least two samples, got {m}"));
        }
        let members = (0..m)
            .into_par_iter()
            .map(|i| self.sample(cfg, &mut trajectory_rng(seed, i as u64)))
            .collect();
        Ok(Ensemble { kind: EnsembleKind::Sampled, members, truncated_mass: 0.0 })
    }

    /// Record-averaged system state `Σ_z p_z |ψ_z⟩⟨ψ_z|` after `cfg.n` cycles.
    pub fn averaged_state(&self, cfg: &ProtocolConfig) -> CMatrix {
        let psi = cfg.initial_system.amplitudes();
        let mut rho = psi * psi.adjoint();
        for _ in 0..cfg.n {
            rho = self
                .kraus
                .iter()
                .fold(CMatrix::zeros(rho.nrows(), rho.ncols()), |acc, k| acc + matmul_adj(&matmul(k, &rho), k));
        }
        rho
    }

    /// First frame potential of the full (unpruned) ensemble, `Tr ρ̄²`.
    pub fn first_frame_potential(&self, cfg: &ProtocolConfig) -> f64 {
        self.averaged_state(cfg).iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Counter-based substream for trajectory `index`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One cycle on the joint space: evolve by `u`, measure the bath, reset it.
pub fn step(
    joint: &StateVector,
    u: &CMatrix,
    cfg: &ProtocolConfig,
) -> Result<BTreeMap<usize, (f64, StateVector)>> {
    let evolved = evolve(u, joint)?;
    measure_bath_distribution(&evolved, &cfg.partition)?
        .into_iter()
        .map(|(m, (p, sys))| Ok((m, (p, attach_reset_bath(&sys, &cfg.partition, &cfg.reset_state)?))))
        .collect()
}

fn monitor_for(hs: &HamiltonianSet, cfg: &ProtocolConfig) -> Result<Monitor> {
    cfg.validate()?;
    if hs.partition() != cfg.partition {
        return invalid("Hamiltonian and protocol partitions differ");
    }
    Monitor::new(&hermitian_eig(hs.h())?, cfg)
}

pub fn enumerate_ensemble(hs: &HamiltonianSet, cfg: &ProtocolConfig) -> Result<Ensemble> {
    monitor_for(hs, cfg)?.enumerate(cfg)
}

pub fn sample_trajectory<R: Rng + ?Sized>(
    hs: &HamiltonianSet,
    cfg: &ProtocolConfig,
    rng: &mut R,
) -> Result<Trajectory> {
    Ok(monitor_for(hs, cfg)?.sample(cfg, rng))
}

pub fn sample_ensemble(hs: &HamiltonianSet, cfg: &ProtocolConfig, m: usize, seed: u64) -> Result<Ensemble> {
    monitor_for(hs, cfg)?.sample_ensemble(cfg, m, seed)
}

/// `n` applications of `U(T/n)` to `ψ₀ ⊗ φ₀` with no measurement in between.
pub fn unmonitored_final_state(spectral: &Spectral, cfg: &ProtocolConfig) -> Result<StateVector> {
    let u = spectral.propagator(cfg.dt());
    let mut joint = cfg.initial_joint();
    for _ in 0..cfg.n {
        joint = evolve(&u, &joint)?;
    }
    Ok(joint)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RevivalCurve {
    /// `(t, ξ(t))` pairs.
    pub points: Vec<(f64, f64)>,
    pub first_minimum: Option<f64>,
    /// First strict local maximum after the first strict local minimum.
    pub first_revival: Option<f64>,
}

/// Return fidelity `ξ(t) = |⟨ψ₀|e^{-iHt}|ψ₀⟩|²` on a time grid.
pub fn revival_curve(hs: &HamiltonianSet, psi0: &StateVector, times: &[f64]) -> Result<RevivalCurve> {
    revival_curve_with(&hermitian_eig(hs.h())?, psi0, times)
}

pub fn revival_curve_with(spectral: &Spectral, psi0: &StateVector, times: &[f64]) -> Result<RevivalCurve> {
    if times.len() < 3 {
        return invalid("revival curve needs at least three grid points");
    }
    if !psi0.is_normalized() {
        return invalid("initial state is not normalized");
    }
    let points = times
        .iter()
        .map(|&t| {
            // e^{0} = I exactly; the eigenbasis round trip would cost an ulp.
            let xi = if t == 0.0 { fidelity(psi0, psi0)? } else { fidelity(psi0, &spectral.evolve_state(psi0, t)?)? };
            Ok((t, xi))
        })
        .collect::<Result<Vec<_>>>()?;
    let xi: Vec<f64> = points.iter().map(|p| p.1).collect();
    let first_min = (1..xi.len() - 1).find(|&i| xi[i] < xi[i - 1] && xi[i] < xi[i + 1]);
    let first_max = first_min
        .and_then(|start| (start + 1..xi.len() - 1).find(|&i| xi[i] > xi[i - 1] && xi[i] > xi[i + 1]));
    Ok(RevivalCurve {
        first_minimum: first_min.map(|i| times[i]),
        first_revival: first_max.map(|i| times[i]),
        points,
    })
}
