//! Simulation and analysis toolkit for monitored spin-chain dynamics.
//!
//! A system register of `n_s` qubits is coupled to a small bath of `n_b`
//! qubits through a time-independent Hamiltonian. The pair is evolved for
//! `Δt = T/n`, the bath is measured in the computational basis and reset,
//! and the cycle repeats `n` times. The measurement records label an
//! ensemble of pure system states whose randomness is quantified by the
//! frame potential
//!
//! ```text
//! F^(K) = Σ_{z,z'} p_z p_z' |⟨ψ_z|ψ_z'⟩|^{2K}
//! ```
//!
//! Modules, bottom up:
//!
//! * [`spin_hilbert`]: state vectors, Pauli strings, bath measurement and reset.
//! * [`hamiltonian`]: Ising / YY / XXX chains and their system-bath splits.
//! * [`propagator`]: Hermitian eigendecomposition and `e^{-iHΔt}`.
//! * [`protocol`]: the evolve-measure-reset engine (exact enumeration,
//!   trajectory sampling, averaged-state propagation, fidelity revivals).
//! * [`frame_potential`]: exact, pair-estimator and Haar frame potentials.
//! * [`theory`]: closed-form decay curves, Zeno bounds and thresholds.

pub mod error;
pub mod frame_potential;
pub mod hamiltonian;
pub mod linalg;
pub mod propagator;
pub mod protocol;
pub mod spin_hilbert;
pub mod theory;

pub use error::{Error, Result};
pub use frame_potential::{
    exact_frame_potential, exact_frame_potentials, haar_frame_potential,
    haar_frame_potential_dim, sampled_frame_potential, sampled_frame_potentials,
    EstimateMethod, FramePotentialEstimate,
};
pub use hamiltonian::{
    classify_alpha, is_integrable, CouplingSpec, HamiltonianSet, Variant, ZenoExponent,
};
pub use linalg::{matmul, matmul_adj, CMatrix, CVector, C64};
pub use propagator::{evolve, hermitian_eig, propagator, Spectral};
pub use protocol::{
    enumerate_ensemble, revival_curve, sample_ensemble, sample_trajectory, step, Ensemble,
    EnsembleKind, Monitor, ProtocolConfig, RevivalCurve, Trajectory,
};
pub use spin_hilbert::{
    attach_reset_bath, basis_state, fidelity, inner_product, measure_bath_distribution,
    pauli_matrix, Pauli, PauliString, QubitPartition, StateVector,
};
pub use theory::{Averaging, TheoryParams};
