//! Matrix primitives: Kronecker products, partial traces, norms and the
//! polar alignment step.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Default cap on the number of entries a Kronecker product may produce.
pub const DEFAULT_ENTRY_LIMIT: u64 = 1 << 24;

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().sum()
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let mut dev = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..=i {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > dev {
                dev = d;
            }
        }
    }
    dev <= tol
}

/// Hermitian part (m + m†)/2.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Kronecker product with the left factor varying slowest.
pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    kron_with_limit(a, b, DEFAULT_ENTRY_LIMIT)
}

/// Kronecker product that panics on the entry cap; for dimensions already
/// validated by the caller.
pub fn kron_u(a: &CMatrix, b: &CMatrix) -> CMatrix {
    kron(a, b).expect("kron dimension cap exceeded")
}

pub fn kron_with_limit(a: &CMatrix, b: &CMatrix, limit: u64) -> Result<CMatrix> {
    let entries = (a.nrows() as u128 * b.nrows() as u128) * (a.ncols() as u128 * b.ncols() as u128);
    if entries > limit as u128 {
        return Err(Error::DimensionLimit { entries, max: limit });
    }
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = CMatrix::zeros(ra * rb, ca * cb);
    for ia in 0..ra {
        for ja in 0..ca {
            let f = a[(ia, ja)];
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for ib in 0..rb {
                for jb in 0..cb {
                    out[(ia * rb + ib, ja * cb + jb)] = f * b[(ib, jb)];
                }
            }
        }
    }
    Ok(out)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for ia in 0..a.len() {
        for ib in 0..b.len() {
            out[ia * b.len() + ib] = a[ia] * b[ib];
        }
    }
    out
}

/// Traces out every tensor factor whose index is not in `keep`.
///
/// `dims` lists the factor dimensions slowest-first, matching the Kronecker
/// convention of [`kron`]. The kept factors preserve their relative order.
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if m.nrows() != m.ncols() || m.nrows() != total {
        return Err(Error::Shape(format!(
            "partial_trace: matrix is {}x{} but dims {:?} give {}",
            m.nrows(),
            m.ncols(),
            dims,
            total
        )));
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::Shape(format!(
            "partial_trace: keep set {:?} out of range for {} factors",
            keep,
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let kept_dim: usize = keep.iter().map(|&i| dims[i]).product();
    let traced_dim: usize = traced.iter().map(|&i| dims[i]).product();

    // Strides of each factor in the flat index (slowest-first layout).
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let flat = |multi_kept: usize, multi_traced: usize| -> usize {
        let mut idx = 0;
        let mut rem = multi_kept;
        for (pos, &f) in keep.iter().enumerate().rev() {
            let d = dims[f];
            let digit = rem % d;
            rem /= d;
            let _ = pos;
            idx += digit * strides[f];
        }
        let mut rem = multi_traced;
        for &f in traced.iter().rev() {
            let d = dims[f];
            let digit = rem % d;
            rem /= d;
            idx += digit * strides[f];
        }
        idx
    };

    let mut out = CMatrix::zeros(kept_dim, kept_dim);
    for i in 0..kept_dim {
        for j in 0..kept_dim {
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..traced_dim {
                acc += m[(flat(i, t), flat(j, t))];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.iter().sum()
}

/// Trace norm of Σᵢ cᵢ vᵢvᵢ† without forming the full matrix.
///
/// The nonzero spectrum equals that of G^{1/2} diag(c) G^{1/2} with the Gram
/// matrix G of the (not necessarily orthogonal) vectors.
pub fn trace_norm_lowrank(vectors: &[CVector], coeffs: &[f64]) -> f64 {
    assert_eq!(vectors.len(), coeffs.len());
    let r = vectors.len();
    if r == 0 {
        return 0.0;
    }
    let mut gram = CMatrix::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            gram[(i, j)] = vectors[i].dotc(&vectors[j]);
        }
    }
    let sqrt_g = sqrt_psd(&gram);
    let mut mid = CMatrix::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..r {
                acc += sqrt_g[(i, k)] * coeffs[k] * sqrt_g[(k, j)];
            }
            mid[(i, j)] = acc;
        }
    }
    hermitian_eigen(&mid).0.iter().map(|l| l.abs()).sum()
}

/// Eigendecomposition of a Hermitian matrix; the input is symmetrized first
/// to shed roundoff.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let se = hermitian_part(m).symmetric_eigen();
    (se.eigenvalues.iter().copied().collect(), se.eigenvectors)
}

/// PSD square root via Hermitian eigendecomposition with eigenvalue dust
/// clipped to zero. The clip is relative to the largest eigenvalue, since
/// roundoff dust of size ε‖m‖ would otherwise contribute √(ε‖m‖) to the root.
pub fn sqrt_psd(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let lmax = vals.iter().cloned().fold(0.0f64, f64::max);
    let cut = lmax * 1e-13;
    let dim = m.nrows();
    let mut out = CMatrix::zeros(dim, dim);
    for (k, &l) in vals.iter().enumerate() {
        if l <= cut {
            continue;
        }
        let s = l.sqrt();
        let col = vecs.column(k);
        for i in 0..dim {
            for j in 0..dim {
                out[(i, j)] += col[i] * col[j].conj() * s;
            }
        }
    }
    out
}

/// Extends a set of orthonormal columns to a full orthonormal basis by
/// Gram-Schmidt against the identity basis in index order.
pub fn complete_orthonormal(cols: &[CVector], dim: usize) -> Vec<CVector> {
    let mut basis: Vec<CVector> = cols.to_vec();
    let mut e = 0usize;
    while basis.len() < dim && e < dim {
        let mut v = CVector::zeros(dim);
        v[e] = C64::new(1.0, 0.0);
        for b in &basis {
            let c = b.dotc(&v);
            v -= b * c;
        }
        let n = v.norm();
        if n > 1e-7 {
            basis.push(v.unscale(n));
        }
        e += 1;
    }
    assert_eq!(basis.len(), dim, "orthonormal completion failed");
    basis
}

/// Unitary maximizing Re tr(U·M) together with the maximum, which equals the
/// trace norm of M.
///
/// From the SVD M = P Σ Q†, the maximizer is U = Q P†. Rank-deficient inputs
/// are completed deterministically: singular directions below threshold are
/// replaced by identity-basis extensions paired in index order.
pub fn polar_align(m: &CMatrix) -> (CMatrix, f64) {
    let dim = m.nrows();
    assert_eq!(dim, m.ncols(), "polar_align requires a square matrix");
    if dim == 0 {
        return (CMatrix::zeros(0, 0), 0.0);
    }
    let svd = m.clone().svd(true, true);
    let p = svd.u.as_ref().expect("svdu");
    let qh = svd.v_t.as_ref().expect("svdv");
    let sigma = &svd.singular_values;
    let value: f64 = sigma.iter().sum();
    let smax = sigma.iter().cloned().fold(0.0f64, f64::max);
    let cut = smax * 1e-13;

    let mut p_cols: Vec<CVector> = Vec::new();
    let mut q_cols: Vec<CVector> = Vec::new();
    for k in 0..sigma.len() {
        if sigma[k] > cut && sigma[k] > 0.0 {
            p_cols.push(p.column(k).into_owned());
            q_cols.push(qh.row(k).adjoint());
        }
    }
    let p_full = complete_orthonormal(&p_cols, dim);
    let q_full = complete_orthonormal(&q_cols, dim);
    let mut u = CMatrix::zeros(dim, dim);
    for k in 0..dim {
        for i in 0..dim {
            for j in 0..dim {
                u[(i, j)] += q_full[k][i] * p_full[k][j].conj();
            }
        }
    }
    (u, value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sigma_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
    }

    fn sigma_z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
    }

    #[test]
    fn kron_identities() {
        let i2 = identity(2);
        let k = kron(&i2, &i2).unwrap();
        assert_eq!(k, identity(4));

        let a = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1., 0.), c(2., 0.)]));
        let b = CMatrix::from_diagonal(&CVector::from_vec(vec![c(3., 0.), c(4., 0.)]));
        let k = kron(&a, &b).unwrap();
        let expect = CMatrix::from_diagonal(&CVector::from_vec(vec![
            c(3., 0.),
            c(4., 0.),
            c(6., 0.),
            c(8., 0.),
        ]));
        assert_eq!(k, expect);
    }

    #[test]
    fn kron_matches_entrywise_definition() {
        // Entrywise double-loop oracle for σx ⊗ σz.
        let a = sigma_x();
        let b = sigma_z();
        let k = kron(&a, &b).unwrap();
        for ia in 0..2 {
            for ja in 0..2 {
                for ib in 0..2 {
                    for jb in 0..2 {
                        let expect = a[(ia, ja)] * b[(ib, jb)];
                        assert_eq!(k[(ia * 2 + ib, ja * 2 + jb)], expect);
                    }
                }
            }
        }
    }

    #[test]
    fn kron_entry_cap() {
        let a = identity(1 << 7);
        let b = identity(1 << 7);
        // (2^7)^2 entries per factor → 2^28 entries total > 2^24.
        match kron(&a, &b) {
            Err(Error::DimensionLimit { .. }) => {}
            other => panic!("expected dimension limit, got {:?}", other.map(|m| m.shape())),
        }
    }

    #[test]
    fn partial_trace_maximally_entangled() {
        let omega = crate::numerics::max_entangled(2);
        let proj = &omega * omega.adjoint();
        let red = partial_trace(&proj, &[2, 2], &[1]).unwrap();
        let expect = identity(2).scale(0.5);
        assert!(frobenius_norm(&(red - expect)) < 1e-12);
    }

    #[test]
    fn partial_trace_product_state() {
        let rho = CMatrix::from_row_slice(2, 2, &[c(0.7, 0.), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.)]);
        let sigma = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(0.5, 0.),
                c(0., 0.1),
                c(0., 0.),
                c(0., -0.1),
                c(0.3, 0.),
                c(0., 0.),
                c(0., 0.),
                c(0., 0.),
                c(0.2, 0.),
            ],
        );
        let joint = kron(&rho, &sigma).unwrap();
        let red = partial_trace(&joint, &[2, 3], &[0]).unwrap();
        assert!(frobenius_norm(&(red - rho)) < 1e-12);
    }

    #[test]
    fn partial_trace_matches_index_summation_oracle() {
        // Random 4-qubit Hermitian, keep factors {0, 2}; compare against an
        // explicit 4-index summation.
        let mut rng = Seed::new(7, 0).rng();
        let m = crate::numerics::random::ginibre(16, 16, &mut rng);
        let herm = hermitian_part(&m);
        let red = partial_trace(&herm, &[2, 2, 2, 2], &[0, 2]).unwrap();

        let idx = |a: usize, b: usize, cc: usize, d: usize| a * 8 + b * 4 + cc * 2 + d;
        let mut oracle = CMatrix::zeros(4, 4);
        for a in 0..2 {
            for cc in 0..2 {
                for ap in 0..2 {
                    for cp in 0..2 {
                        let mut acc = C64::new(0.0, 0.0);
                        for b in 0..2 {
                            for d in 0..2 {
                                acc += herm[(idx(a, b, cc, d), idx(ap, b, cp, d))];
                            }
                        }
                        oracle[(a * 2 + cc, ap * 2 + cp)] = acc;
                    }
                }
            }
        }
        assert!(frobenius_norm(&(red - oracle)) < 1e-12);
    }

    #[test]
    fn partial_trace_composes() {
        let mut rng = Seed::new(11, 3).rng();
        let m = hermitian_part(&crate::numerics::random::ginibre(24, 24, &mut rng));
        // Trace out factor 2 then factor 1 vs both at once (dims 2x3x4).
        let step1 = partial_trace(&m, &[2, 3, 4], &[0, 1]).unwrap();
        let step2 = partial_trace(&step1, &[2, 3], &[0]).unwrap();
        let joint = partial_trace(&m, &[2, 3, 4], &[0]).unwrap();
        assert!(frobenius_norm(&(step2 - joint)) < 1e-12);
    }

    #[test]
    fn trace_norm_cases() {
        assert!((trace_norm(&sigma_z()) - 2.0).abs() < 1e-12);
        // |0><0| - |+><+| has eigenvalues ±1/√2.
        let zero = CVector::from_vec(vec![c(1., 0.), c(0., 0.)]);
        let plus = CVector::from_vec(vec![c(1. / 2f64.sqrt(), 0.), c(1. / 2f64.sqrt(), 0.)]);
        let m = &zero * zero.adjoint() - &plus * plus.adjoint();
        assert!((trace_norm(&m) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn trace_norm_lowrank_matches_dense() {
        let mut rng = Seed::new(5, 1).rng();
        let vs: Vec<CVector> = (0..4)
            .map(|_| crate::numerics::random::ginibre(6, 1, &mut rng).column(0).into_owned())
            .collect();
        let coeffs = [0.5, -0.25, 1.5, -0.7];
        let mut dense = CMatrix::zeros(6, 6);
        for (v, &cc) in vs.iter().zip(coeffs.iter()) {
            dense += (v * v.adjoint()).scale(cc);
        }
        let lr = trace_norm_lowrank(&vs, &coeffs);
        assert!((lr - trace_norm(&dense)).abs() < 1e-10);
    }

    #[test]
    fn polar_align_diagonal() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(2., 0.), c(3., 0.)]));
        let (u, v) = polar_align(&m);
        assert!((v - 5.0).abs() < 1e-12);
        assert!(frobenius_norm(&(u - identity(2))) < 1e-12);
    }

    #[test]
    fn polar_align_sigma_x() {
        let (u, v) = polar_align(&sigma_x());
        assert!((v - 2.0).abs() < 1e-12);
        assert!(frobenius_norm(&(u - sigma_x())) < 1e-12);
    }

    #[test]
    fn polar_align_value_is_trace_norm() {
        let mut rng = Seed::new(19, 0).rng();
        for _ in 0..20 {
            let m = crate::numerics::random::ginibre(3, 3, &mut rng);
            let (u, v) = polar_align(&m);
            assert!((v - trace_norm(&m)).abs() < 1e-10);
            // U unitary and Re tr(U M) achieves the value.
            assert!(frobenius_norm(&(&u * u.adjoint() - identity(3))) < 1e-12);
            let got = trace(&(&u * &m)).re;
            assert!((got - v).abs() < 1e-10);
        }
    }

    #[test]
    fn polar_align_rank_deficient_is_deterministic() {
        let mut m = CMatrix::zeros(3, 3);
        m[(0, 0)] = c(2.0, 0.0);
        let (u1, v) = polar_align(&m);
        let (u2, _) = polar_align(&m);
        assert_eq!(u1, u2);
        assert!((v - 2.0).abs() < 1e-12);
        assert!(frobenius_norm(&(&u1 * u1.adjoint() - identity(3))) < 1e-10);
    }

    use crate::numerics::Seed;
}
