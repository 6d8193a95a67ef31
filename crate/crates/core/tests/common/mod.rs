//! Brute-force joint-space oracles shared by the integration tests. They use
//! a Taylor-series exponential and explicit projectors, not the library's
//! eigensolver or Kraus operators.

#![allow(dead_code)]

use std::collections::BTreeMap;

use hdt_core::{CMatrix, CVector, C64};

pub fn expm_taylor(a: &CMatrix) -> CMatrix {
    let norm: f64 = a.iter().map(|z| z.norm()).sum::<f64>().max(1e-300);
    let squarings = (norm.log2().ceil() as i32 + 4).max(0) as u32;
    let scaled = a / C64::from(2f64.powi(squarings as i32));
    let dim = a.nrows();
    let mut sum = CMatrix::identity(dim, dim);
    let mut term = CMatrix::identity(dim, dim);
    for k in 1..=30 {
        term = &term * &scaled / C64::from(k as f64);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn unit(dim: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[i] = C64::new(1.0, 0.0);
    v
}

/// Every record of `n` evolve→measure→reset cycles with its Born weight and
/// normalized final system state; zero-weight records are kept.
pub fn all_records(h: &CMatrix, dim_s: usize, dim_b: usize, total_time: f64, n: usize) -> BTreeMap<Vec<u32>, (f64, CVector)> {
    let u = expm_taylor(&(h * C64::new(0.0, -total_time / n as f64)));
    let id_s = CMatrix::identity(dim_s, dim_s);
    let reset = unit(dim_b, 0);
    // R_m = I_s ⊗ |0⟩⟨m| maps outcome m back to the reset state
    let ket_bra = |i: usize, j: usize| CMatrix::from_fn(dim_b, dim_b, |r, c| C64::from(f64::from(r == i && c == j)));
    let resets: Vec<CMatrix> = (0..dim_b).map(|m| kron(&id_s, &ket_bra(0, m))).collect();
    let bra0 = CMatrix::from_fn(1, dim_b, |_, c| reset[c].conj());
    let lift_out = kron(&id_s, &bra0);

    let mut start = CVector::zeros(dim_s * dim_b);
    start[0] = C64::new(1.0, 0.0);
    let mut layer: Vec<(Vec<u32>, CVector)> = vec![(Vec::new(), start)];
    for _ in 0..n {
        let mut next = Vec::with_capacity(layer.len() * dim_b);
        for (rec, psi) in &layer {
            let evolved = &u * psi;
            for (m, r) in resets.iter().enumerate() {
                let mut rec = rec.clone();
                rec.push(m as u32);
                next.push((rec, r * &evolved));
            }
        }
        layer = next;
    }
    layer
        .into_iter()
        .map(|(rec, joint)| {
            let sys = &lift_out * joint;
            let p = sys.norm_squared();
            let state = if p > 0.0 { sys.unscale(p.sqrt()) } else { sys };
            (rec, (p, state))
        })
        .collect()
}

/// `Σ_{z,z'} p_z p_z' |⟨ψ_z|ψ_z'⟩|^{2K}` by a plain double loop.
pub fn naive_frame_potential(records: &[(f64, CVector)], k: u32) -> f64 {
    let mut total = 0.0;
    for (p, a) in records {
        for (q, b) in records {
            total += p * q * a.dotc(b).norm_sqr().powi(k as i32);
        }
    }
    total
}
