//! Open-chain spin Hamiltonians and their system / bath / coupling split.
//!
//! Sites `0..n_s` are the system, `n_s..n_s+n_b` the bath, so an open chain
//! has exactly one cut, between sites `n_s-1` and `n_s`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    bath_block, bath_expectation, commutator, embed_bath, embed_system, hermiticity_error,
    max_abs, CMatrix, CVector, ONE,
};
use crate::spin_hilbert::{pauli_matrix, Pauli, PauliString, QubitPartition, StateVector};

/// Off-diagonal bath blocks of `H_c0` smaller than this count as vanishing.
pub const COMMUTATION_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Transverse and longitudinal fields plus nearest-neighbour ZZ.
    Ising,
    /// Ising plus nearest-neighbour YY.
    Yy,
    /// Ising plus three-site XXX.
    Xxx,
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ising" => Ok(Variant::Ising),
            "yy" => Ok(Variant::Yy),
            "xxx" => Ok(Variant::Xxx),
            other => invalid(format!("unknown Hamiltonian variant {other:?}")),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Ising => "ising",
            Variant::Yy => "yy",
            Variant::Xxx => "xxx",
        })
    }
}

/// Couplings of an open chain. Couplings that the variant does not use are
/// ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingSpec {
    pub n_s: usize,
    pub n_b: usize,
    pub j_x: f64,
    pub j_z: f64,
    pub j_zz: f64,
    pub j_yy: f64,
    pub j_xxx: f64,
    pub variant: Variant,
}

impl CouplingSpec {
    /// Default couplings for the given variant and register sizes.
    pub fn with_defaults(variant: Variant, n_s: usize, n_b: usize) -> Self {
        Self { n_s, n_b, j_x: 1.05, j_z: 0.5, j_zz: 1.0, j_yy: 0.5, j_xxx: 0.5, variant }
    }

    pub fn partition(&self) -> Result<QubitPartition> {
        QubitPartition::new(self.n_s, self.n_b)
    }

    /// Multiplies every coupling by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            j_x: self.j_x * factor,
            j_z: self.j_z * factor,
            j_zz: self.j_zz * factor,
            j_yy: self.j_yy * factor,
            j_xxx: self.j_xxx * factor,
            ..self.clone()
        }
    }
}

/// Pauli terms of the chain Hamiltonian on `n_sites` sites, zero-weight
/// terms dropped.
pub fn chain_terms(n_sites: usize, spec: &CouplingSpec) -> Result<Vec<PauliString>> {
    if n_sites == 0 {
        return invalid("chain needs at least one site");
    }
    let two_site = spec.j_zz != 0.0 || (spec.variant == Variant::Yy && spec.j_yy != 0.0);
    if n_sites < 2 && two_site {
        return invalid("two-site couplings need at least two sites");
    }
    if spec.variant == Variant::Xxx && n_sites < 3 {
        return invalid("the XXX variant needs at least three sites");
    }

    let mut terms = Vec::new();
    let mut push = |ops: &[(usize, Pauli)], coeff: f64| -> Result<()> {
        if coeff != 0.0 {
            terms.push(PauliString::on_sites(n_sites, ops, coeff)?);
        }
        Ok(())
    };
    for j in 0..n_sites {
        push(&[(j, Pauli::X)], spec.j_x)?;
        push(&[(j, Pauli::Z)], spec.j_z)?;
    }
    for j in 0..n_sites.saturating_sub(1) {
        push(&[(j, Pauli::Z), (j + 1, Pauli::Z)], spec.j_zz)?;
        if spec.variant == Variant::Yy {
            push(&[(j, Pauli::Y), (j + 1, Pauli::Y)], spec.j_yy)?;
        }
    }
    if spec.variant == Variant::Xxx {
        for j in 1..n_sites - 1 {
            push(&[(j - 1, Pauli::X), (j, Pauli::X), (j + 1, Pauli::X)], spec.j_xxx)?;
        }
    }
    Ok(terms)
}

/// Dense chain Hamiltonian on `n_sites` sites.
pub fn chain_matrix(n_sites: usize, spec: &CouplingSpec) -> Result<CMatrix> {
    let dim = 1usize << n_sites;
    Ok(chain_terms(n_sites, spec)?
        .iter()
        .fold(CMatrix::zeros(dim, dim), |acc, t| acc + pauli_matrix(t)))
}

/// Exponent of the Zeno-regime bound `exp(-c_H T^{α+1} / n^α)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZenoExponent {
    One,
    Three,
}

impl ZenoExponent {
    pub fn value(self) -> u32 {
        match self {
            ZenoExponent::One => 1,
            ZenoExponent::Three => 3,
        }
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.value())
    }

    pub fn from_value(alpha: u32) -> Result<Self> {
        match alpha {
            1 => Ok(ZenoExponent::One),
            3 => Ok(ZenoExponent::Three),
            other => invalid(format!("alpha must be 1 or 3, got {other}")),
        }
    }
}

/// Full Hamiltonian with its decompositions, all on the joint space:
///
/// * `H = H_s + H_b + H_c` by term support;
/// * `H_s0 = H_s + ⟨φ₀|H_c|φ₀⟩ ⊗ I_b`, `H_c0 = H_c - ⟨φ₀|H_c|φ₀⟩ ⊗ I_b`;
/// * `H_b = H_bm + V` with `H_bm` diagonal in the computational basis.
#[derive(Clone, Debug)]
pub struct HamiltonianSet {
    partition: QubitPartition,
    h: CMatrix,
    h_s: CMatrix,
    h_b: CMatrix,
    h_c: CMatrix,
    h_s0: CMatrix,
    h_c0: CMatrix,
    h_bm: CMatrix,
    v: CMatrix,
    reset: CVector,
}

impl HamiltonianSet {
    /// Builds the chain for `spec`, shifted about the all-zero bath state.
    pub fn build(spec: &CouplingSpec) -> Result<Self> {
        let part = spec.partition()?;
        let terms = chain_terms(part.total(), spec)?;
        Self::from_terms(part, &terms)
    }

    /// Sorts arbitrary Pauli terms into system, bath and coupling parts by
    /// their support. Identity terms go to the system.
    pub fn from_terms(partition: QubitPartition, terms: &[PauliString]) -> Result<Self> {
        let dim = partition.dim();
        let mut h_s = CMatrix::zeros(dim, dim);
        let mut h_b = CMatrix::zeros(dim, dim);
        let mut h_c = CMatrix::zeros(dim, dim);
        for term in terms {
            if term.num_qubits() != partition.total() {
                return invalid(format!(
                    "term {term} acts on {} qubits, chain has {}",
                    term.num_qubits(),
                    partition.total()
                ));
            }
            let support = term.support();
            let in_system = support.iter().all(|&k| partition.is_system_site(k));
            let in_bath = support.iter().all(|&k| !partition.is_system_site(k));
            let target = match (in_system, in_bath) {
                (true, _) => &mut h_s,
                (false, true) => &mut h_b,
                (false, false) => &mut h_c,
            };
            *target += pauli_matrix(term);
        }
        Self::from_parts(partition, h_s, h_b, h_c)
    }

    /// Assembles a set from explicit joint-space parts.
    pub fn from_parts(
        partition: QubitPartition,
        h_s: CMatrix,
        h_b: CMatrix,
        h_c: CMatrix,
    ) -> Result<Self> {
        let dim = partition.dim();
        for (name, m) in [("H_s", &h_s), ("H_b", &h_b), ("H_c", &h_c)] {
            if m.shape() != (dim, dim) {
                return invalid(format!("{name} has shape {:?}, expected {dim}x{dim}", m.shape()));
            }
            if hermiticity_error(m) > 1e-12 {
                return invalid(format!("{name} is not Hermitian"));
            }
        }
        let h = &h_s + &h_b + &h_c;
        let zeros = CMatrix::zeros(dim, dim);
        let set = Self {
            partition,
            h,
            h_s: h_s.clone(),
            h_b,
            h_c: h_c.clone(),
            h_s0: h_s,
            h_c0: h_c,
            h_bm: zeros.clone(),
            v: zeros,
            reset: StateVector::zero(partition.n_b).into_amplitudes(),
        };
        let shifted = set.mean_field_shift(&StateVector::zero(partition.n_b))?;
        Ok(shifted.bath_split())
    }

    /// Moves the reset-state expectation of the coupling into the system part.
    pub fn mean_field_shift(&self, phi0: &StateVector) -> Result<Self> {
        if phi0.num_qubits() != self.partition.n_b {
            return invalid(format!(
                "reset state has {} qubits, bath has {}",
                phi0.num_qubits(),
                self.partition.n_b
            ));
        }
        if !phi0.is_normalized() {
            return invalid("reset state is not normalized");
        }
        let mean = bath_expectation(&self.h_c, phi0.amplitudes());
        let shift = embed_system(&mean, self.partition.dim_b());
        Ok(Self {
            h_s0: &self.h_s + &shift,
            h_c0: &self.h_c - &shift,
            reset: phi0.amplitudes().clone(),
            ..self.clone()
        })
    }

    /// Splits `H_b` into its computational-basis diagonal and the remainder.
    pub fn bath_split(&self) -> Self {
        let diag = CMatrix::from_diagonal(&self.h_b.diagonal());
        Self { v: &self.h_b - &diag, h_bm: diag, ..self.clone() }
    }

    pub fn partition(&self) -> QubitPartition {
        self.partition
    }

    pub fn h(&self) -> &CMatrix {
        &self.h
    }

    pub fn h_s(&self) -> &CMatrix {
        &self.h_s
    }

    pub fn h_b(&self) -> &CMatrix {
        &self.h_b
    }

    pub fn h_c(&self) -> &CMatrix {
        &self.h_c
    }

    pub fn h_s0(&self) -> &CMatrix {
        &self.h_s0
    }

    pub fn h_c0(&self) -> &CMatrix {
        &self.h_c0
    }

    pub fn h_bm(&self) -> &CMatrix {
        &self.h_bm
    }

    pub fn v(&self) -> &CMatrix {
        &self.v
    }

    /// Bath state the mean-field shift was taken about.
    pub fn reset_state(&self) -> &CVector {
        &self.reset
    }

    /// `max_m ‖[H_c0, I_s ⊗ |φ_m⟩⟨φ_m|]‖_max`, computed as explicit commutators.
    pub fn projector_commutator_residual(&self) -> f64 {
        let (dim_s, dim_b) = (self.partition.dim_s(), self.partition.dim_b());
        (0..dim_b)
            .map(|m| {
                let mut proj = CMatrix::zeros(dim_b, dim_b);
                proj[(m, m)] = ONE;
                max_abs(&commutator(&self.h_c0, &embed_bath(&proj, dim_s)))
            })
            .fold(0.0, f64::max)
    }
}

/// `J_z = 0` makes the Ising chain integrable (free fermions).
pub fn is_integrable(spec: &CouplingSpec) -> Result<bool> {
    if spec.variant != Variant::Ising {
        return Err(Error::UnsupportedClassification);
    }
    Ok(spec.j_z == 0.0)
}

/// `α = 3` when the residual coupling `H_c0` has no off-diagonal bath blocks
/// (it commutes with every bath projector), `α = 1` otherwise.
pub fn classify_alpha(hs: &HamiltonianSet) -> ZenoExponent {
    let dim_b = hs.partition.dim_b();
    for m in 0..dim_b {
        for mp in 0..dim_b {
            if m != mp && max_abs(&bath_block(&hs.h_c0, dim_b, m, mp)) >= COMMUTATION_TOLERANCE {
                return ZenoExponent::One;
            }
        }
    }
    ZenoExponent::Three
}
