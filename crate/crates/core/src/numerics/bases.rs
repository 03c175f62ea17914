//! Mutually unbiased basis pairs and maximally entangled vectors.

use super::matrix::{CVector, C64};

/// The computational basis {e_j} together with its Fourier transform
/// {f_k}, f_k = d^{-1/2} Σ_j exp(2πi jk/d) e_j with 1-based j, k.
///
/// The two bases are mutually unbiased: |⟨e_j|f_k⟩|² = 1/d for all j, k.
pub fn fourier_mub(dim: usize) -> (Vec<CVector>, Vec<CVector>) {
    assert!(dim >= 2, "fourier_mub requires d >= 2");
    let e: Vec<CVector> = (0..dim)
        .map(|j| {
            let mut v = CVector::zeros(dim);
            v[j] = C64::new(1.0, 0.0);
            v
        })
        .collect();
    let norm = 1.0 / (dim as f64).sqrt();
    let f: Vec<CVector> = (1..=dim)
        .map(|k| {
            CVector::from_fn(dim, |j0, _| {
                let j = j0 + 1;
                let phase = 2.0 * std::f64::consts::PI * (j * k) as f64 / dim as f64;
                C64::new(phase.cos(), phase.sin()) * norm
            })
        })
        .collect();
    (e, f)
}

/// |Ω⟩ = d^{-1/2} Σ_j |e_j⟩ ⊗ |e_j⟩ on a d·d dimensional space.
pub fn max_entangled(dim: usize) -> CVector {
    assert!(dim >= 1);
    let mut v = CVector::zeros(dim * dim);
    let a = 1.0 / (dim as f64).sqrt();
    for j in 0..dim {
        v[j * dim + j] = C64::new(a, 0.0);
    }
    v
}
