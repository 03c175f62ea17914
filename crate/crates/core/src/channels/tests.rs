use super::*;
use crate::hybrid::Label;
use crate::numerics::{
    fidelity, frobenius_norm, haar_state, haar_unitary, hermitian_eigen, hermitian_part, kron_u,
    max_entangled, trace_norm, CVector,
};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn pauli() -> [CMatrix; 4] {
    [
        identity(2),
        CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
        CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
        CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
    ]
}

fn random_density<R: rand::Rng>(dim: usize, rng: &mut R) -> DensityMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    for w in [0.5, 0.3, 0.2] {
        let v = crate::numerics::haar_state_rng(dim, rng);
        m += (&v * v.adjoint()).scale(w);
    }
    DensityMatrix::new(m).unwrap()
}

// ---------------------------------------------------------------------------
// apply / construction
// ---------------------------------------------------------------------------

#[test]
fn apply_identity_preserves_input() {
    let mut rng = Seed::new(1, 0).rng();
    let rho = random_density(3, &mut rng);
    let id = Channel::identity(3);
    let out = id.apply_density(&rho).unwrap();
    assert!(frobenius_norm(&(out.matrix() - rho.matrix())) < 1e-12);
}

#[test]
fn apply_depolarizing_outputs_maximally_mixed() {
    let mut rng = Seed::new(2, 0).rng();
    let rho = random_density(3, &mut rng);
    let s = depolarizing(3);
    let out = s.apply_density(&rho).unwrap();
    assert!(frobenius_norm(&(out.matrix() - identity(3).unscale(3.0))) < 1e-12);
}

#[test]
fn apply_measurement_born_rule() {
    let (e, _) = crate::numerics::fourier_mub(2);
    let meas = measurement_in_basis(&e).unwrap();
    let plus = CVector::from_vec(vec![c(1. / 2f64.sqrt(), 0.), c(1. / 2f64.sqrt(), 0.)]);
    let out = meas.apply(&DensityMatrix::pure(&plus).unwrap()).unwrap();
    let labels: Vec<Label> = out.labels().cloned().collect();
    assert_eq!(labels, vec![Label(vec![1]), Label(vec![2])]);
    for l in &labels {
        assert!((out.weight(l) - 0.5).abs() < 1e-12);
    }
}

#[test]
fn incomplete_kraus_rejected() {
    let half = identity(2).scale(0.5);
    match Channel::from_kraus(2, 2, vec![half]) {
        Err(crate::error::Error::InvalidChannel(_)) => {}
        other => panic!("expected invalid channel, got {:?}", other.is_ok()),
    }
}

// ---------------------------------------------------------------------------
// compose / tensor
// ---------------------------------------------------------------------------

#[test]
fn compose_with_identity_is_identity_on_choi() {
    let ch = random_channel(2, 3, Seed::new(3, 0));
    let id = Channel::identity(2);
    let composed = Channel::compose(&id, &ch).unwrap();
    assert!(frobenius_norm(&(composed.choi() - ch.choi())) < 1e-12);
    let composed = Channel::compose(&ch, &id).unwrap();
    assert!(frobenius_norm(&(composed.choi() - ch.choi())) < 1e-12);
}

#[test]
fn tensor_with_identity_scales_choi_dims() {
    let ch = random_channel(2, 2, Seed::new(4, 0));
    let nu = 3usize;
    let ext = Channel::tensor(&Channel::identity(nu), &ch).unwrap();
    let base = ch.choi();
    let extended = ext.choi();
    assert_eq!(extended.nrows(), base.nrows() * nu * nu);
}

#[test]
fn compose_matches_kraus_product_oracle() {
    let c1 = random_channel(2, 2, Seed::new(5, 0));
    let c2 = random_channel(2, 3, Seed::new(5, 1));
    let composed = Channel::compose(&c2, &c1).unwrap();
    // Oracle: explicit Kraus products, independent Choi assembly.
    let mut oracle = CMatrix::zeros(4, 4);
    let omega = max_entangled(2);
    let om = &omega * omega.adjoint();
    for k2 in &c2.blocks()[0].kraus {
        for k1 in &c1.blocks()[0].kraus {
            let k = k2 * k1;
            let big = kron_u(&k, &identity(2));
            oracle += &big * &om * big.adjoint();
        }
    }
    assert!(frobenius_norm(&(composed.choi() - oracle)) < 1e-12);
}

// ---------------------------------------------------------------------------
// stinespring
// ---------------------------------------------------------------------------

#[test]
fn stinespring_of_unitary_has_trivial_ancilla() {
    let u = haar_unitary(3, Seed::new(6, 0));
    let ch = Channel::unitary(&u).unwrap();
    let dil = stinespring(&ch);
    assert_eq!(dil.blocks.len(), 1);
    assert_eq!(dil.blocks[0].dim_a, 1);
    let round = dil.restriction_channel().unwrap();
    assert!(frobenius_norm(&(round.choi() - ch.choi())) < 1e-12);
}

#[test]
fn stinespring_pauli_twirl_depolarizing() {
    // Depolarizing at d=2 in its Pauli-twirl representation: 4 Kraus with
    // weights 1/4 each; ancilla dimension 4 and exact roundtrip.
    let kraus: Vec<CMatrix> = pauli().iter().map(|p| p.scale(0.5)).collect();
    let ch = Channel::from_kraus(2, 2, kraus).unwrap();
    let dil = stinespring(&ch);
    assert_eq!(dil.blocks[0].dim_a, 4);
    let round = dil.restriction_channel().unwrap();
    assert!(frobenius_norm(&(round.choi() - depolarizing(2).choi())) < 1e-12);
    // Isometry check.
    StinespringDilation::new(2, dil.blocks.clone()).unwrap();
}

#[test]
fn stinespring_roundtrip_random_three_kraus() {
    let ch = random_channel(2, 3, Seed::new(7, 0));
    let dil = stinespring(&ch);
    let round = dil.restriction_channel().unwrap();
    assert!(frobenius_norm(&(round.choi() - ch.choi())) < 1e-10);
}

// ---------------------------------------------------------------------------
// choi / fidelities
// ---------------------------------------------------------------------------

#[test]
fn choi_trivials() {
    let id = Channel::identity(2);
    let omega = max_entangled(2);
    assert!(frobenius_norm(&(id.choi() - &omega * omega.adjoint())) < 1e-12);

    let s = depolarizing(3);
    let expect = identity(9).unscale(9.0);
    assert!(frobenius_norm(&(s.choi() - expect)) < 1e-12);

    let ch = random_channel(3, 2, Seed::new(8, 0));
    let tr: C64 = ch.choi().diagonal().sum();
    assert!((tr.re - 1.0).abs() < 1e-12 && tr.im.abs() < 1e-14);
}

#[test]
fn channel_fidelity_cases() {
    assert!((Channel::identity(4).channel_fidelity().unwrap() - 1.0).abs() < 1e-12);

    let u = haar_unitary(3, Seed::new(9, 0));
    let ch = Channel::unitary(&u).unwrap();
    let expect = crate::numerics::trace(&u).norm_sqr() / 9.0;
    assert!((ch.channel_fidelity().unwrap() - expect).abs() < 1e-12);

    let d = 3usize;
    let fc = depolarizing(d).channel_fidelity().unwrap();
    assert!((fc - 1.0 / (d * d) as f64).abs() < 1e-12);
}

#[test]
fn average_fidelity_exact_cases() {
    let id = Channel::identity(5);
    assert!((id.average_fidelity(AverageFidelityMode::Exact).unwrap().value - 1.0).abs() < 1e-12);

    // Depolarizing: F_c = 1/d² gives F̄ = 1/d; cross-check ⟨ψ|1/d|ψ⟩ = 1/d.
    for d in [2usize, 3, 5] {
        let f = depolarizing(d).average_fidelity(AverageFidelityMode::Exact).unwrap().value;
        assert!((f - 1.0 / d as f64).abs() < 1e-12, "d={}", d);
    }
}

#[test]
fn average_fidelity_monte_carlo_matches_exact() {
    let ch = random_channel(2, 3, Seed::new(10, 0));
    let exact = ch.average_fidelity(AverageFidelityMode::Exact).unwrap().value;
    let mc = ch
        .average_fidelity(AverageFidelityMode::MonteCarlo { samples: 20_000, seed: Seed::new(10, 7) })
        .unwrap();
    let err = mc.stderr.unwrap();
    assert!((mc.value - exact).abs() <= 3.0 * err, "mc {} exact {} 3se {}", mc.value, exact, 3.0 * err);
}

#[test]
fn average_fidelity_rejects_tiny_sample_count() {
    let ch = Channel::identity(2);
    assert!(ch
        .average_fidelity(AverageFidelityMode::MonteCarlo { samples: 1, seed: Seed::new(0, 0) })
        .is_err());
}

// ---------------------------------------------------------------------------
// distances
// ---------------------------------------------------------------------------

#[test]
fn cb_lower_choi_identical_channels_is_zero() {
    let ch = random_channel(3, 2, Seed::new(11, 0));
    assert!(cb_lower_choi(&ch, &ch).unwrap() < 1e-12);
}

#[test]
fn cb_lower_choi_single_unitary_vs_depolarizing() {
    // Rank-one Choi minus maximally mixed: eigenvalues 1 − 1/d² and −1/d²
    // (d²−1 of them), so the distance is exactly 2 − 2/d².
    for d in [2usize, 3, 4] {
        let r = randomizing_channel(d, 1, Seed::new(12, d as u64)).unwrap();
        let s = depolarizing(d);
        let got = cb_lower_choi(&r, &s).unwrap();
        let expect = 2.0 - 2.0 / (d * d) as f64;
        assert!((got - expect).abs() < 1e-10, "d={} got {}", d, got);
    }
}

#[test]
fn cb_lower_choi_bounded_by_two() {
    for t in 0..5u64 {
        let a = random_channel(2, 2, Seed::new(13, t));
        let b = random_channel(2, 3, Seed::new(14, t));
        let v = cb_lower_choi(&a, &b).unwrap();
        assert!(v <= 2.0 + 1e-12);
    }
}

#[test]
fn gram_fast_path_matches_dense_choi() {
    // d=16 triggers the low-rank path; rebuilding the same Kraus list as a
    // general channel forces the dense path.
    let d = 16usize;
    let r = randomizing_channel(d, 3, Seed::new(15, 0)).unwrap();
    let s = depolarizing(d);
    let fast = cb_lower_choi(&r, &s).unwrap();
    let r_general = Channel::from_kraus(d, d, r.blocks()[0].kraus.clone()).unwrap();
    let dense = cb_lower_choi(&r_general, &s).unwrap();
    assert!((fast - dense).abs() < 1e-9, "fast {} dense {}", fast, dense);
}

#[test]
fn op_norm_estimate_trivials() {
    let ch = random_channel(2, 2, Seed::new(16, 0));
    let est = op_norm_estimate(&ch, &ch, 3, Seed::new(16, 1)).unwrap();
    assert!(est.value < 1e-10);

    // σz conjugation vs identity: the witness |+⟩ separates them fully.
    let sz = Channel::unitary(&pauli()[3]).unwrap();
    let id = Channel::identity(2);
    let est = op_norm_estimate(&sz, &id, 8, Seed::new(16, 2)).unwrap();
    assert!((est.value - 2.0).abs() < 1e-8, "value {}", est.value);
    // The witness achieves the reported value.
    let w = &est.witness;
    let rho = DensityMatrix::pure(&w.clone().normalize()).unwrap();
    let out = sz.apply_density(&rho).unwrap().into_matrix() - id.apply_density(&rho).unwrap().into_matrix();
    assert!((trace_norm(&out) - est.value).abs() < 1e-8);
}

#[test]
fn choi_probe_monotone_under_post_processing() {
    // Post-composing with a channel cannot increase the Choi-probe distance.
    for t in 0..5u64 {
        let a = random_channel(2, 2, Seed::new(17, 2 * t));
        let b = random_channel(2, 2, Seed::new(17, 2 * t + 1));
        let e = random_channel(2, 3, Seed::new(18, t));
        let before = cb_lower_choi(&a, &b).unwrap();
        let after = cb_lower_choi(
            &Channel::compose(&e, &a).unwrap(),
            &Channel::compose(&e, &b).unwrap(),
        )
        .unwrap();
        assert!(after <= before + 1e-10, "after {} before {}", after, before);
    }
}

// ---------------------------------------------------------------------------
// alignment
// ---------------------------------------------------------------------------

fn random_dilation_pair(seed: Seed) -> (StinespringDilation, StinespringDilation) {
    // Isometries C² → C²⊗C² from the first two columns of Haar unitaries.
    let mk = |s: Seed| {
        let u = haar_unitary(4, s);
        let mut v = CMatrix::zeros(4, 2);
        for i in 0..4 {
            for j in 0..2 {
                v[(i, j)] = u[(i, j)];
            }
        }
        StinespringDilation::single(Label::root(), 2, 2, v).unwrap()
    };
    (mk(seed.child(0)), mk(seed.child(1)))
}

#[test]
fn align_identical_dilations_is_zero() {
    let (v0, _) = random_dilation_pair(Seed::new(19, 0));
    let res = align_isometries(&v0, &v0, true, &AlignOptions::default()).unwrap();
    assert!(res.value < 1e-9, "value {}", res.value);
    assert!(res.converged);
}

#[test]
fn align_recovers_exact_rotation() {
    let (v0, _) = random_dilation_pair(Seed::new(20, 0));
    let w = haar_unitary(2, Seed::new(20, 9));
    // v1 = (W ⊗ 1_B) v0 on the unpadded A factor.
    let b0 = &v0.blocks[0];
    let big = kron_u(&w, &identity(2));
    let v1 = StinespringDilation::single(Label::root(), 2, 2, &big * &b0.v).unwrap();
    let res = align_isometries(&v0, &v1, true, &AlignOptions::default()).unwrap();
    assert!(res.value <= 1e-8, "value {}", res.value);
}

/// Brute-force oracle: dense grid over U(2) (SU(2) angles plus global
/// phase), then coordinate-descent polish of the best grid points.
fn grid_align_oracle(v0: &CMatrix, v1: &CMatrix) -> f64 {
    // Precompute M_ij = V1†(E_ij ⊗ 1)V0, so V1†(U⊗1)V0 = Σ U_ij M_ij.
    let mut ms = Vec::with_capacity(4);
    for i in 0..2 {
        for j in 0..2 {
            let mut e = CMatrix::zeros(2, 2);
            e[(i, j)] = c(1.0, 0.0);
            ms.push(v1.adjoint() * kron_u(&e, &identity(2)) * v0);
        }
    }
    // λ_min of Herm(Σ U_ij M_ij) for U(θ,α,β,γ).
    let lam_min = |angles: [f64; 4]| -> f64 {
        let [theta, alpha, beta, gamma] = angles;
        let (ct, st) = (theta.cos(), theta.sin());
        let a = C64::new(0.0, alpha).exp() * ct;
        let b = C64::new(0.0, beta).exp() * st;
        let phase = C64::new(0.0, gamma).exp();
        let u = [phase * a, phase * b, phase * (-b.conj()), phase * a.conj()];
        let mut m = CMatrix::zeros(2, 2);
        for (k, uk) in u.iter().enumerate() {
            m += &ms[k] * *uk;
        }
        let h = hermitian_part(&m);
        let tr_half = (h[(0, 0)].re + h[(1, 1)].re) / 2.0;
        let dev = ((h[(0, 0)].re - h[(1, 1)].re) / 2.0).hypot(h[(0, 1)].norm());
        tr_half - dev
    };
    let steps = |n: usize, hi: f64| (0..n).map(move |k| k as f64 * hi / n as f64);
    let mut best: Vec<([f64; 4], f64)> = Vec::new();
    for theta in steps(16, std::f64::consts::FRAC_PI_2) {
        for alpha in steps(40, std::f64::consts::TAU) {
            for beta in steps(40, std::f64::consts::TAU) {
                for gamma in steps(20, std::f64::consts::PI) {
                    let v = lam_min([theta, alpha, beta, gamma]);
                    best.push(([theta, alpha, beta, gamma], v));
                    if best.len() > 2000 {
                        best.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap());
                        best.truncate(20);
                    }
                }
            }
        }
    }
    best.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap());
    best.truncate(20);
    let mut top = f64::NEG_INFINITY;
    for (angles, _) in &best {
        let mut x = *angles;
        let mut step = 0.05f64;
        let mut cur = lam_min(x);
        while step > 1e-10 {
            let mut improved = false;
            for k in 0..4 {
                for dir in [-1.0, 1.0] {
                    let mut y = x;
                    y[k] += dir * step;
                    let v = lam_min(y);
                    if v > cur {
                        cur = v;
                        x = y;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        top = top.max(cur);
    }
    (2.0 - 2.0 * top).max(0.0).sqrt()
}

#[test]
fn align_matches_grid_oracle() {
    for t in 0..3u64 {
        let (v0, v1) = random_dilation_pair(Seed::new(21, t));
        let opts = AlignOptions { pad_to_bound: false, restarts: 12, ..Default::default() };
        let res = align_isometries(&v0, &v1, true, &opts).unwrap();
        let oracle = grid_align_oracle(&v0.blocks[0].v, &v1.blocks[0].v);
        assert!(
            (res.value - oracle).abs() <= 1e-4,
            "trial {}: align {} vs oracle {}",
            t,
            res.value,
            oracle
        );
    }
}

#[test]
fn align_blockwise_matches_unrestricted_on_direct_sums() {
    for t in 0..3u64 {
        let seed = Seed::new(22, t);
        let mk = |s: Seed| {
            // Two-block dilation with Σ_x V_x†V_x = 1: split an isometry
            // C² → C⁸ into two 2x2-blocks.
            let u = haar_unitary(8, s);
            let mut b0 = CMatrix::zeros(4, 2);
            let mut b1 = CMatrix::zeros(4, 2);
            for j in 0..2 {
                for i in 0..4 {
                    b0[(i, j)] = u[(i, j)];
                    b1[(i, j)] = u[(4 + i, j)];
                }
            }
            StinespringDilation::new(
                2,
                vec![
                    DilationBlock { label: Label(vec![0]), dim_a: 2, dim_b: 2, v: b0 },
                    DilationBlock { label: Label(vec![1]), dim_a: 2, dim_b: 2, v: b1 },
                ],
            )
            .unwrap()
        };
        let v0 = mk(seed.child(0));
        let v1 = mk(seed.child(1));
        let opts = AlignOptions { restarts: 12, ..Default::default() };
        let block = align_isometries(&v0, &v1, true, &opts).unwrap();
        let full = align_isometries(&v0, &v1, false, &opts).unwrap();
        assert!(
            (block.value - full.value).abs() <= 1e-8,
            "block {} vs full {}",
            block.value,
            full.value
        );
    }
}

#[test]
fn continuity_sandwich_on_random_pairs() {
    // align² ≤ cb_oracle ≤ 2·align within oracle tolerance.
    for t in 0..5u64 {
        let a = random_channel(2, 2, Seed::new(23, 2 * t));
        let b = random_channel(2, 2, Seed::new(23, 2 * t + 1));
        let va = stinespring(&a);
        let vb = stinespring(&b);
        let res = align_isometries(&va, &vb, true, &AlignOptions::default()).unwrap();
        let cb = cb_norm_estimate(&a, &b, 2, 30, Seed::new(24, t)).unwrap().value;
        assert!(res.value * res.value <= cb + 1e-3, "left: {} vs {}", res.value * res.value, cb);
        assert!(cb <= 2.0 * res.value + 1e-3, "right: {} vs {}", cb, 2.0 * res.value);
    }
}

// ---------------------------------------------------------------------------
// special channels
// ---------------------------------------------------------------------------

#[test]
fn randomizing_mu_one_is_unitary_conjugation() {
    let r = randomizing_channel(3, 1, Seed::new(25, 0)).unwrap();
    assert_eq!(r.blocks()[0].kraus.len(), 1);
    let k = &r.blocks()[0].kraus[0];
    assert!(frobenius_norm(&(k.adjoint() * k - identity(3))) < 1e-12);
}

#[test]
fn randomizing_completeness() {
    let r = randomizing_channel(4, 7, Seed::new(26, 0)).unwrap();
    let mut sum = CMatrix::zeros(4, 4);
    for k in &r.blocks()[0].kraus {
        sum += k.adjoint() * k;
    }
    assert!(frobenius_norm(&(sum - identity(4))) < 1e-12);
}

#[test]
fn measure_prepare_dephasing_has_diagonal_choi() {
    let (e, _) = crate::numerics::fourier_mub(2);
    let povm: Vec<CMatrix> = e.iter().map(|v| v * v.adjoint()).collect();
    let states: Vec<DensityMatrix> = e.iter().map(|v| DensityMatrix::pure(v).unwrap()).collect();
    let ch = measure_prepare(&povm, &states).unwrap();
    let choi = ch.choi();
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                assert!(choi[(i, j)].norm() < 1e-12, "off-diagonal at ({},{})", i, j);
            }
        }
    }
    // Completely dephasing: ρ ↦ Σ ⟨j|ρ|j⟩ |j⟩⟨j|.
    let mut rng = Seed::new(27, 0).rng();
    let rho = random_density(2, &mut rng);
    let out = ch.apply_density(&rho).unwrap();
    assert!((out.matrix()[(0, 0)].re - rho.matrix()[(0, 0)].re).abs() < 1e-12);
    assert!(out.matrix()[(0, 1)].norm() < 1e-12);
}

#[test]
fn measure_prepare_choi_is_ppt() {
    // Separability of the measure-and-prepare Choi, checked via partial
    // transpose: eigenvalues ≥ −1e-10.
    let mut rng = Seed::new(28, 0).rng();
    let (e, f) = crate::numerics::fourier_mub(2);
    let povm: Vec<CMatrix> = e.iter().map(|v| (v * v.adjoint()).scale(0.5)).chain(
        f.iter().map(|v| (v * v.adjoint()).scale(0.5)),
    ).collect();
    let states: Vec<DensityMatrix> = (0..4).map(|_| random_density(2, &mut rng)).collect();
    let ch = measure_prepare(&povm, &states).unwrap();
    let choi = ch.choi();
    let pt = partial_transpose_second(&choi, 2, 2);
    let (vals, _) = hermitian_eigen(&pt);
    assert!(vals.iter().all(|&l| l >= -1e-10), "PPT violated: {:?}", vals);
}

#[test]
fn measure_prepare_rejects_invalid_povm() {
    let bad = vec![identity(2).scale(0.7)];
    let states = vec![DensityMatrix::maximally_mixed(2)];
    assert!(measure_prepare(&bad, &states).is_err());
}

// ---------------------------------------------------------------------------
// joint fidelity optimum (used by the cheat-bound chain)
// ---------------------------------------------------------------------------

#[test]
fn joint_fidelity_reaches_one_plus_f() {
    let base = Seed::new(29, 0);
    for t in 0..20u64 {
        let mut rng = base.child(t).rng();
        let d = 2 + (t % 3) as usize;
        let rho = random_density(d, &mut rng);
        let sigma = random_density(d, &mut rng);
        let f = fidelity(&rho, &sigma).unwrap();
        let (_, achieved) = joint_fidelity_optimum(&rho, &sigma).unwrap();
        assert!(achieved >= 1.0 + f - 1e-3, "achieved {} vs 1+F {}", achieved, 1.0 + f);
        assert!(achieved <= 1.0 + f + 1e-9, "achieved {} exceeds 1+F {}", achieved, 1.0 + f);
    }
}

// ---------------------------------------------------------------------------
// energy truncation
// ---------------------------------------------------------------------------

fn number_operator(dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |i, j| if i == j { c(i as f64, 0.0) } else { c(0.0, 0.0) })
}

#[test]
fn truncation_keeps_everything_when_h_bounded_by_cutoff() {
    let dim = 4usize;
    let ec = EnergyConstraint::new(number_operator(dim), 10.0).unwrap();
    let ch = random_channel(dim, 2, Seed::new(30, 0));
    // E/γ = 10/0.5 = 20 exceeds every eigenvalue, so P = 1.
    let tc = energy_truncate(&ch, &ec, 0.5, None).unwrap();
    assert_eq!(tc.rank, dim);
    let mut rng = Seed::new(30, 1).rng();
    let rho = random_density(dim, &mut rng);
    let full = ch.apply_density(&rho).unwrap();
    let compressed = tc.apply(&rho).unwrap();
    assert!(frobenius_norm(&(full.matrix() - compressed.matrix())) < 1e-12);
}

#[test]
fn truncation_projector_matches_spectral_cutoff() {
    let ec = EnergyConstraint::new(number_operator(16), 2.0).unwrap();
    let ch = Channel::identity(16);
    let tc = energy_truncate(&ch, &ec, 0.25, None).unwrap();
    // E/γ = 8: eigenvalues 0..8 kept, rank 9.
    assert_eq!(tc.rank, 9);
}

#[test]
fn truncation_bound_holds_on_constrained_states() {
    let dim = 8usize;
    let ec = EnergyConstraint::new(number_operator(dim), 1.5).unwrap();
    for t in 0..10u64 {
        let ch = random_energy_respecting_channel(&ec, Seed::new(31, t)).unwrap();
        for gamma in [0.1, 0.25] {
            let tc = energy_truncate(&ch, &ec, gamma, Some((5, Seed::new(32, t)))).unwrap();
            let rho = sample_constrained_state(&ec, Seed::new(33, t)).unwrap();
            let dev = truncation_deviation(&ch, &tc, &rho).unwrap();
            assert!(dev <= tc.bound + 1e-9, "dev {} bound {}", dev, tc.bound);
        }
    }
}

#[test]
fn truncation_rejects_bad_gamma() {
    let ec = EnergyConstraint::new(number_operator(4), 1.0).unwrap();
    let ch = Channel::identity(4);
    assert!(energy_truncate(&ch, &ec, 0.0, None).is_err());
    assert!(energy_truncate(&ch, &ec, 1.0, None).is_err());
}

// ---------------------------------------------------------------------------
// classical-factor and bystander norm lemmas (smoke; full battery in the
// acceptance suite)
// ---------------------------------------------------------------------------

#[test]
fn classical_factor_does_not_increase_sampled_norm() {
    for t in 0..5u64 {
        let a = random_channel(2, 2, Seed::new(34, 2 * t));
        let b = random_channel(2, 2, Seed::new(34, 2 * t + 1));
        let (cq_value, cq_states) = cq_norm_estimate(&a, &b, 3, 4, Seed::new(35, t)).unwrap();
        let plain = op_norm_estimate_with_starts(&a, &b, &cq_states, 8, Seed::new(36, t)).unwrap();
        assert!(cq_value <= plain.value + 1e-6, "cq {} plain {}", cq_value, plain.value);
    }
}

#[test]
fn entanglement_breaking_bystander_is_useless() {
    let (e, _) = crate::numerics::fourier_mub(2);
    let povm: Vec<CMatrix> = e.iter().map(|v| v * v.adjoint()).collect();
    let states: Vec<DensityMatrix> = e.iter().map(|v| DensityMatrix::pure(v).unwrap()).collect();
    let d_channel = measure_prepare(&povm, &states).unwrap();
    for t in 0..3u64 {
        let a = random_channel(2, 2, Seed::new(37, 2 * t));
        let b = random_channel(2, 2, Seed::new(37, 2 * t + 1));
        let with_bystander = bystander_norm_estimate(&a, &b, &d_channel, 6, Seed::new(38, t)).unwrap();
        // Branch the bipartite witness back into plain starts: its reduced
        // pure components are covered by fresh plain ascents.
        let plain = op_norm_estimate(&a, &b, 24, Seed::new(39, t)).unwrap();
        assert!(
            with_bystander.value <= plain.value + 1e-6,
            "bystander {} plain {}",
            with_bystander.value,
            plain.value
        );
    }
}

#[test]
fn probe_state_helper() {
    let p = probe_state(3);
    assert_eq!(p.dim(), 9);
    let _ = haar_average_fidelity_cp(&[identity(2)], 2);
    let h = haar_average_fidelity_cp(&[identity(2)], 2);
    assert!((h - 1.0).abs() < 1e-12);
    let _ = haar_state(2, Seed::new(0, 0));
}
