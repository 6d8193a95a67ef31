//! Dense complex linear-algebra aliases and the block helpers used for the
//! system ⊗ bath layout.
//!
//! Joint basis index is `s * dim_b + b`: system qubits are the most
//! significant bits, so bath outcome `m` selects a strided slice.

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64 as C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn dagger(a: &CMatrix) -> CMatrix {
    a.adjoint()
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Largest elementwise deviation from Hermiticity, `max |A - A†|`.
pub fn hermiticity_error(a: &CMatrix) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    matmul(a, b) - matmul(b, a)
}

/// Complex product through three real products (Gauss), which lets the
/// blocked real kernel do the work.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions differ");
    let (ar, ai) = (a.map(|z| z.re), a.map(|z| z.im));
    let (br, bi) = (b.map(|z| z.re), b.map(|z| z.im));
    let rr = &ar * &br;
    let ii = &ai * &bi;
    let mixed = (ar + ai) * (br + bi);
    CMatrix::from_fn(a.nrows(), b.ncols(), |i, j| {
        C64::new(rr[(i, j)] - ii[(i, j)], mixed[(i, j)] - rr[(i, j)] - ii[(i, j)])
    })
}

/// `a · b†`
pub fn matmul_adj(a: &CMatrix, b: &CMatrix) -> CMatrix {
    matmul(a, &b.adjoint())
}

/// Spectral norm (largest singular value).
pub fn operator_norm(a: &CMatrix) -> f64 {
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// System operator `⟨φ_m| A |φ_m'⟩` for basis states of the bath.
pub fn bath_block(a: &CMatrix, dim_b: usize, m: usize, m_prime: usize) -> CMatrix {
    let dim_s = a.nrows() / dim_b;
    CMatrix::from_fn(dim_s, dim_s, |s, sp| a[(s * dim_b + m, sp * dim_b + m_prime)])
}

/// Partial expectation `⟨φ| A |φ⟩` over the bath, leaving a system operator.
pub fn bath_expectation(a: &CMatrix, phi: &CVector) -> CMatrix {
    let dim_b = phi.len();
    let dim_s = a.nrows() / dim_b;
    let mut out = CMatrix::zeros(dim_s, dim_s);
    for (b, &cb) in phi.iter().enumerate() {
        if cb == ZERO {
            continue;
        }
        for (bp, &cbp) in phi.iter().enumerate() {
            if cbp == ZERO {
                continue;
            }
            let w = cb.conj() * cbp;
            for s in 0..dim_s {
                for sp in 0..dim_s {
                    out[(s, sp)] += w * a[(s * dim_b + b, sp * dim_b + bp)];
                }
            }
        }
    }
    out
}

/// `op ⊗ I_b` on the joint space.
pub fn embed_system(op: &CMatrix, dim_b: usize) -> CMatrix {
    op.kronecker(&identity(dim_b))
}

/// `I_s ⊗ op` on the joint space.
pub fn embed_bath(op: &CMatrix, dim_s: usize) -> CMatrix {
    identity(dim_s).kronecker(op)
}

pub fn vector_norm_sqr(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}
