//! Computational-basis state vectors and Pauli operators for qubit chains,
//! plus the measure-and-reset primitives acting on the bath register.
//!
//! Qubit 0 is the most significant bit of the basis index. System qubits
//! come first, so a joint amplitude lives at `s * 2^n_b + b`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{vector_norm_sqr, CMatrix, CVector, C64, I, ONE, ZERO};

/// Outcomes with Born probability below this are treated as impossible.
pub const ZERO_PROBABILITY: f64 = 1e-14;

const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
    num_qubits: usize,
}

impl StateVector {
    /// Wraps raw amplitudes without normalizing. The length must be `2^n`, `n ≥ 1`.
    pub fn from_amplitudes(amplitudes: CVector) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return invalid(format!("state length {len} is not 2^n with n >= 1"));
        }
        Ok(Self { num_qubits: len.trailing_zeros() as usize, amplitudes })
    }

    /// Wraps amplitudes and rescales them to unit norm.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let mut state = Self::from_amplitudes(amplitudes)?;
        let norm = state.norm();
        if norm == 0.0 || !norm.is_finite() {
            return invalid("cannot normalize a zero or non-finite vector");
        }
        state.amplitudes.unscale_mut(norm);
        Ok(state)
    }

    pub fn from_slice(amplitudes: &[C64]) -> Result<Self> {
        Self::from_amplitudes(CVector::from_column_slice(amplitudes))
    }

    /// The all-zero computational basis state.
    pub fn zero(num_qubits: usize) -> Self {
        let mut amplitudes = CVector::zeros(1 << num_qubits);
        amplitudes[0] = ONE;
        Self { amplitudes, num_qubits }
    }

    /// Haar-random pure state: normalized i.i.d. complex Gaussian amplitudes.
    pub fn random<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> Self {
        let dim = 1 << num_qubits;
        let amplitudes = CVector::from_fn(dim, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        Self::normalized(amplitudes).expect("gaussian vector is nonzero")
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        vector_norm_sqr(&self.amplitudes).sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        StateVector {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
            num_qubits: self.num_qubits + other.num_qubits,
        }
    }
}

/// Split of a chain into `n_s` system qubits followed by `n_b` bath qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitPartition {
    pub n_s: usize,
    pub n_b: usize,
}

impl QubitPartition {
    pub fn new(n_s: usize, n_b: usize) -> Result<Self> {
        if n_s == 0 || n_b == 0 {
            return invalid(format!("partition needs n_s >= 1 and n_b >= 1, got ({n_s}, {n_b})"));
        }
        Ok(Self { n_s, n_b })
    }

    pub fn total(&self) -> usize {
        self.n_s + self.n_b
    }

    pub fn dim_s(&self) -> usize {
        1 << self.n_s
    }

    pub fn dim_b(&self) -> usize {
        1 << self.n_b
    }

    pub fn dim(&self) -> usize {
        1 << self.total()
    }

    pub fn is_system_site(&self, site: usize) -> bool {
        site < self.n_s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> CMatrix {
        let m = match self {
            Pauli::I => [ONE, ZERO, ZERO, ONE],
            Pauli::X => [ZERO, ONE, ONE, ZERO],
            Pauli::Y => [ZERO, -I, I, ZERO],
            Pauli::Z => [ONE, ZERO, ZERO, -ONE],
        };
        CMatrix::from_row_slice(2, 2, &m)
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Weighted tensor product of single-qubit Paulis, letter `k` acting on qubit `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliString {
    pub letters: Vec<Pauli>,
    pub coefficient: f64,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>, coefficient: f64) -> Self {
        Self { letters, coefficient }
    }

    /// `coefficient · P_{site_0} P_{site_1} …` on an `n`-qubit register.
    pub fn on_sites(n: usize, ops: &[(usize, Pauli)], coefficient: f64) -> Result<Self> {
        let mut letters = vec![Pauli::I; n];
        for &(site, p) in ops {
            if site >= n {
                return invalid(format!("site {site} outside a {n}-qubit register"));
            }
            letters[site] = p;
        }
        Ok(Self { letters, coefficient })
    }

    pub fn parse(letters: &str, coefficient: f64) -> Result<Self> {
        let mut s: PauliString = letters.parse()?;
        s.coefficient = coefficient;
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.letters.len()
    }

    /// Sites carrying a non-identity letter.
    pub fn support(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(k, _)| k)
            .collect()
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => invalid(format!("unknown Pauli letter {other:?}")),
            })
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return invalid("empty Pauli string");
        }
        Ok(Self { letters, coefficient: 1.0 })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}·", self.coefficient)?;
        self.letters.iter().try_for_each(|p| write!(f, "{}", p.letter()))
    }
}

/// Basis state from a bit string, qubit 0 first (most significant).
pub fn basis_state(n: usize, bits: &str) -> Result<StateVector> {
    if n == 0 {
        return invalid("basis state needs at least one qubit");
    }
    if bits.chars().count() != n {
        return invalid(format!("bit string {bits:?} does not have length {n}"));
    }
    let mut index = 0usize;
    for c in bits.chars() {
        index <<= 1;
        match c {
            '0' => {}
            '1' => index |= 1,
            other => return invalid(format!("bit string contains {other:?}")),
        }
    }
    let mut amplitudes = CVector::zeros(1 << n);
    amplitudes[index] = ONE;
    Ok(StateVector { amplitudes, num_qubits: n })
}

/// `⟨a|b⟩`, conjugate-linear in `a`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<C64> {
    if a.dim() != b.dim() {
        return invalid(format!("dimension mismatch: {} vs {}", a.dim(), b.dim()));
    }
    Ok(a.amplitudes.dotc(&b.amplitudes))
}

pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(inner_product(a, b)?.norm_sqr())
}

pub fn pauli_matrix(p: &PauliString) -> CMatrix {
    let mut out = CMatrix::from_element(1, 1, C64::from(p.coefficient));
    for letter in &p.letters {
        out = out.kronecker(&letter.matrix());
    }
    out
}

/// Born distribution of a computational-basis measurement of the bath and
/// the normalized post-measurement system state for every possible outcome.
/// Outcomes with probability below [`ZERO_PROBABILITY`] are absent.
pub fn measure_bath_distribution(
    joint: &StateVector,
    part: &QubitPartition,
) -> Result<BTreeMap<usize, (f64, StateVector)>> {
    if joint.num_qubits != part.total() {
        return invalid(format!(
            "joint state has {} qubits, partition expects {}",
            joint.num_qubits,
            part.total()
        ));
    }
    let (dim_s, dim_b) = (part.dim_s(), part.dim_b());
    let mut out = BTreeMap::new();
    for m in 0..dim_b {
        let block = CVector::from_fn(dim_s, |s, _| joint.amplitudes[s * dim_b + m]);
        let p = vector_norm_sqr(&block);
        if p < ZERO_PROBABILITY {
            continue;
        }
        let conditional = StateVector {
            amplitudes: block.unscale(p.sqrt()),
            num_qubits: part.n_s,
        };
        out.insert(m, (p, conditional));
    }
    Ok(out)
}

/// `system ⊗ reset` in system-major order.
pub fn attach_reset_bath(
    system: &StateVector,
    part: &QubitPartition,
    reset: &StateVector,
) -> Result<StateVector> {
    if system.num_qubits != part.n_s {
        return invalid(format!("system has {} qubits, expected {}", system.num_qubits, part.n_s));
    }
    if reset.num_qubits != part.n_b {
        return invalid(format!("reset state has {} qubits, expected {}", reset.num_qubits, part.n_b));
    }
    Ok(system.tensor(reset))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermiticity_error, identity, max_abs_diff};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn plus() -> StateVector {
        StateVector::from_slice(&[c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]).unwrap()
    }

    #[test]
    fn basis_states() {
        assert_eq!(basis_state(1, "0").unwrap().amplitudes().as_slice(), &[ONE, ZERO]);
        assert_eq!(basis_state(2, "00").unwrap().amplitudes().as_slice(), &[ONE, ZERO, ZERO, ZERO]);
        // qubit 0 is the most significant bit
        assert_eq!(basis_state(2, "10").unwrap().amplitudes().as_slice(), &[ZERO, ZERO, ONE, ZERO]);
        assert!(matches!(basis_state(2, "0"), Err(Error::InvalidArgument(_))));
        assert!(basis_state(2, "0a").is_err());
    }

    #[test]
    fn bit_order_matches_pauli_action() {
        // X on qubit 0 of |00⟩ gives |10⟩.
        let x0 = pauli_matrix(&PauliString::parse("XI", 1.0).unwrap());
        let flipped = &x0 * basis_state(2, "00").unwrap().amplitudes();
        assert_eq!(&flipped, basis_state(2, "10").unwrap().amplitudes());
        let z1 = pauli_matrix(&PauliString::parse("IZ", 1.0).unwrap());
        let v = &z1 * basis_state(2, "01").unwrap().amplitudes();
        assert_eq!(v[1], -ONE);
    }

    #[test]
    fn inner_products() {
        let zero = basis_state(1, "0").unwrap();
        let one = basis_state(1, "1").unwrap();
        assert_eq!(inner_product(&zero, &zero).unwrap(), ONE);
        assert_eq!(inner_product(&zero, &one).unwrap(), ZERO);
        let ip = inner_product(&plus(), &one).unwrap();
        assert!((ip - c(FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!(inner_product(&zero, &basis_state(2, "00").unwrap()).is_err());
    }

    #[test]
    fn fidelities() {
        let zero = basis_state(1, "0").unwrap();
        let one = basis_state(1, "1").unwrap();
        assert!((fidelity(&plus(), &plus()).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(fidelity(&zero, &one).unwrap(), 0.0);
        assert!((fidelity(&plus(), &zero).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pauli_matrices() {
        let x = pauli_matrix(&PauliString::parse("X", 1.0).unwrap());
        assert_eq!(x, CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]));
        let zz = pauli_matrix(&PauliString::parse("ZZ", 1.0).unwrap());
        let expected = CMatrix::from_diagonal(&CVector::from_vec(vec![ONE, -ONE, -ONE, ONE]));
        assert_eq!(zz, expected);
        let y = pauli_matrix(&PauliString::parse("Y", 1.0).unwrap());
        assert_eq!(y, CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]));
        for l in ["X", "Y", "Z"] {
            let p = pauli_matrix(&PauliString::parse(l, 1.0).unwrap());
            assert!(max_abs_diff(&(&p * &p), &identity(2)) < 1e-15);
        }
    }

    #[test]
    fn measure_bell_pair() {
        let part = QubitPartition::new(1, 1).unwrap();
        let bell = StateVector::from_slice(&[c(FRAC_1_SQRT_2), ZERO, ZERO, c(FRAC_1_SQRT_2)]).unwrap();
        let dist = measure_bath_distribution(&bell, &part).unwrap();
        assert_eq!(dist.len(), 2);
        assert!((dist[&0].0 - 0.5).abs() < 1e-15);
        assert_eq!(dist[&0].1, basis_state(1, "0").unwrap());
        assert!((dist[&1].0 - 0.5).abs() < 1e-15);
        assert_eq!(dist[&1].1, basis_state(1, "1").unwrap());
    }

    #[test]
    fn measure_product_state_omits_impossible_outcomes() {
        let part = QubitPartition::new(1, 1).unwrap();
        let joint = plus().tensor(&basis_state(1, "0").unwrap());
        let dist = measure_bath_distribution(&joint, &part).unwrap();
        assert_eq!(dist.keys().copied().collect::<Vec<_>>(), vec![0]);
        assert!((dist[&0].0 - 1.0).abs() < 1e-15);
        assert!(fidelity(&dist[&0].1, &plus()).unwrap() > 1.0 - 1e-15);
    }

    #[test]
    fn measure_random_state_against_amplitude_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let part = QubitPartition::new(2, 1).unwrap();
        let joint = StateVector::random(3, &mut rng);
        let dist = measure_bath_distribution(&joint, &part).unwrap();
        // direct summation over all 8 amplitudes: index = s*2 + m
        let mut brute = [0.0f64; 2];
        for (idx, a) in joint.amplitudes().iter().enumerate() {
            brute[idx & 1] += a.norm_sqr();
        }
        for m in 0..2 {
            assert!((dist[&m].0 - brute[m]).abs() < 1e-14);
        }
    }

    #[test]
    fn attach_reset() {
        let part = QubitPartition::new(1, 1).unwrap();
        let zero = basis_state(1, "0").unwrap();
        let one = basis_state(1, "1").unwrap();
        assert_eq!(attach_reset_bath(&one, &part, &zero).unwrap(), basis_state(2, "10").unwrap());
        let joint = attach_reset_bath(&plus(), &part, &zero).unwrap();
        let expected =
            StateVector::from_slice(&[c(FRAC_1_SQRT_2), ZERO, c(FRAC_1_SQRT_2), ZERO]).unwrap();
        assert!(max_abs_diff(
            &CMatrix::from_column_slice(4, 1, joint.amplitudes().as_slice()),
            &CMatrix::from_column_slice(4, 1, expected.amplitudes().as_slice())
        ) < 1e-15);
        assert!(attach_reset_bath(&zero, &part, &basis_state(2, "00").unwrap()).is_err());
        let dist = measure_bath_distribution(&joint, &part).unwrap();
        assert_eq!(dist.len(), 1);
        assert!(fidelity(&dist[&0].1, &plus()).unwrap() > 1.0 - 1e-14);
    }

    fn arb_state(n: usize) -> impl Strategy<Value = StateVector> {
        any::<u64>().prop_map(move |seed| StateVector::random(n, &mut ChaCha8Rng::seed_from_u64(seed)))
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliString> {
        (prop::collection::vec(0usize..4, n), -3.0f64..3.0).prop_map(|(idx, coeff)| {
            let letters = idx.into_iter().map(|k| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][k]).collect();
            PauliString::new(letters, coeff)
        })
    }

    proptest! {
        #[test]
        fn measurement_is_complete((n_s, n_b) in (1usize..4, 1usize..3), seed in any::<u64>()) {
            let part = QubitPartition::new(n_s, n_b).unwrap();
            let joint = StateVector::random(part.total(), &mut ChaCha8Rng::seed_from_u64(seed));
            let dist = measure_bath_distribution(&joint, &part).unwrap();
            let total: f64 = dist.values().map(|(p, _)| p).sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
            for (_, st) in dist.values() {
                prop_assert!((st.norm() - 1.0).abs() < 1e-10);
            }
        }

        #[test]
        fn pauli_strings_are_hermitian(p in arb_pauli(3)) {
            prop_assert!(hermiticity_error(&pauli_matrix(&p)) < 1e-12);
        }

        #[test]
        fn inner_product_conjugate_symmetry(a in arb_state(3), b in arb_state(3)) {
            let ab = inner_product(&a, &b).unwrap();
            let ba = inner_product(&b, &a).unwrap();
            prop_assert!((ab - ba.conj()).norm() < 1e-15);
        }

        #[test]
        fn fidelity_bounded(a in arb_state(4), b in arb_state(4)) {
            let f = fidelity(&a, &b).unwrap();
            prop_assert!((0.0..=1.0 + 1e-10).contains(&f));
        }
    }
}
