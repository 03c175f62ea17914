use super::*;
use crate::channels::{
    cb_norm_estimate, op_norm_estimate, random_channel, AlignOptions,
};
use crate::hybrid::Side;
use crate::numerics::{frobenius_norm, identity, Seed};
use crate::protocol::{
    concealment, concealment_lower_at_depth, evaluate_cheat, register_channel, run_register,
    synthesize_cheat, validate, Until,
};

// ---------------------------------------------------------------------------
// Bell
// ---------------------------------------------------------------------------

#[test]
fn bell_is_perfectly_concealing() {
    let inst = bell_protocol(1);
    validate(&inst.tree, &inst.a0, &inst.bobs[0]).unwrap();
    let reg = inst.register().unwrap();
    let report =
        concealment(&inst.tree, &inst.a0, &inst.a1, &reg, &inst.rho0, &AlignOptions::default())
            .unwrap();
    assert!(report.eps_lower < 1e-10, "eps_lower {}", report.eps_lower);
    assert!(report.eps_upper <= 1e-8, "eps_upper {}", report.eps_upper);
    assert!(report.eps_trace < 1e-10);

    // Bob's commit restriction is 1/2 for both honest strategies.
    for a in [&inst.a0, &inst.a1] {
        let out = run_register(&inst.tree, a, &reg, &identity(1), &inst.rho0, Until::Commit)
            .unwrap();
        let bob = out.restrict(Side::Bob).unwrap();
        for (_, branch) in bob.branches() {
            let dev =
                frobenius_norm(&(branch.state.matrix() - identity(2).scale(0.5)));
            assert!(dev < 1e-10, "Bob marginal deviates by {}", dev);
        }
    }
}

#[test]
fn bell_register_channel_identical_for_both_bits() {
    let inst = bell_protocol(2);
    let reg = inst.register().unwrap();
    let g0 = register_channel(&inst.tree, &inst.a0, &reg, &inst.rho0).unwrap();
    let g1 = register_channel(&inst.tree, &inst.a1, &reg, &inst.rho0).unwrap();
    let b0 = g0.choi_blocks();
    let b1 = g1.choi_blocks();
    for ((l0, c0), (l1, c1)) in b0.iter().zip(b1.iter()) {
        assert_eq!(l0, l1);
        assert!(frobenius_norm(&(c0 - c1)) < 1e-10);
    }
}

#[test]
fn bell_sneak_flip_works_perfectly() {
    let inst = bell_protocol(1);
    let reg = inst.register().unwrap();
    let plan = synthesize_cheat(
        &inst.tree,
        &inst.a0,
        &inst.a1,
        &reg,
        &inst.rho0,
        &AlignOptions::default(),
    )
    .unwrap();
    assert!(plan.alignment_value <= 1e-8, "alignment {}", plan.alignment_value);
    let report = evaluate_cheat(
        &inst.tree,
        &plan,
        &inst.a0,
        &inst.a1,
        &reg,
        &inst.rho0,
        &inst.verifier,
        None,
    )
    .unwrap();
    assert!(report.delta_hat <= 1e-8, "delta_hat {}", report.delta_hat);
    assert!(report.eta <= 1e-10, "eta {}", report.eta);
    // Honest and cheating openings both verify with probability 1.
    for row in &report.rows {
        assert!(row.accept_honest > 1.0 - 1e-10, "honest acceptance {}", row.accept_honest);
        assert!(row.accept_cheat > 1.0 - 1e-8, "cheat acceptance {}", row.accept_cheat);
    }
}

#[test]
fn bell_honest_plan_has_zero_gap() {
    // Evaluating a plan against identical honest strategies (a0 = a1)
    // leaves no detectable difference at all.
    let inst = bell_protocol(1);
    let reg = inst.register().unwrap();
    let plan = synthesize_cheat(
        &inst.tree,
        &inst.a0,
        &inst.a0,
        &reg,
        &inst.rho0,
        &AlignOptions::default(),
    )
    .unwrap();
    assert!(plan.alignment_value <= 1e-9);
    let report = evaluate_cheat(
        &inst.tree,
        &plan,
        &inst.a0,
        &inst.a0,
        &reg,
        &inst.rho0,
        &inst.verifier,
        None,
    )
    .unwrap();
    assert!(report.delta_hat <= 1e-9, "delta_hat {}", report.delta_hat);
}

// ---------------------------------------------------------------------------
// Anonymous state
// ---------------------------------------------------------------------------

#[test]
fn anon_leak_zero_is_perfectly_concealing() {
    let inst = anonymous_state_protocol(2, 0.0, Seed::new(100, 0)).unwrap();
    let reg = inst.register().unwrap();
    let plan = synthesize_cheat(
        &inst.tree,
        &inst.a0,
        &inst.a1,
        &reg,
        &inst.rho0,
        &AlignOptions::default(),
    )
    .unwrap();
    assert!(plan.alignment_value <= 1e-8);
    let report = evaluate_cheat(
        &inst.tree,
        &plan,
        &inst.a0,
        &inst.a1,
        &reg,
        &inst.rho0,
        &inst.verifier,
        None,
    )
    .unwrap();
    assert!(report.delta_hat <= 1e-8, "delta_hat {}", report.delta_hat);
    assert!(report.eta <= 1e-10);
}

#[test]
fn anon_full_leak_is_fully_distinguishable() {
    let inst = anonymous_state_protocol(2, 1.0, Seed::new(101, 0)).unwrap();
    let reg = inst.register().unwrap();
    let report =
        concealment(&inst.tree, &inst.a0, &inst.a1, &reg, &inst.rho0, &AlignOptions::default())
            .unwrap();
    assert!(report.eps_lower > 1.9, "eps_lower {}", report.eps_lower);
    assert!(report.eps_upper >= report.eps_lower - 1e-9);
}

#[test]
fn anon_cheat_obeys_theorem_bound_against_oracle() {
    let seed = Seed::new(102, 0);
    let inst = anonymous_state_protocol(2, 0.1, seed).unwrap();
    let reg = inst.register().unwrap();
    let plan = synthesize_cheat(
        &inst.tree,
        &inst.a0,
        &inst.a1,
        &reg,
        &inst.rho0,
        &AlignOptions::default(),
    )
    .unwrap();
    let conc =
        concealment(&inst.tree, &inst.a0, &inst.a1, &reg, &inst.rho0, &AlignOptions::default())
            .unwrap();
    let report = evaluate_cheat(
        &inst.tree,
        &plan,
        &inst.a0,
        &inst.a1,
        &reg,
        &inst.rho0,
        &inst.verifier,
        Some(&conc),
    )
    .unwrap();
    // Independent diamond-norm estimate of the register-channel distance.
    let g0 = register_channel(&inst.tree, &inst.a0, &reg, &inst.rho0).unwrap();
    let g1 = register_channel(&inst.tree, &inst.a1, &reg, &inst.rho0).unwrap();
    let eps_oracle = cb_norm_estimate(&g0, &g1, reg.len(), 24, Seed::new(102, 9)).unwrap().value;
    assert!(
        report.delta_hat <= 2.0 * eps_oracle.sqrt() + 1e-3,
        "delta_hat {} vs 2√eps {}",
        report.delta_hat,
        2.0 * eps_oracle.sqrt()
    );
    // Sandwich: the synthesized alignment value against the oracle.
    let v = plan.alignment_value;
    assert!(v * v <= eps_oracle + 1e-3, "v² {} vs eps {}", v * v, eps_oracle);
    assert!(eps_oracle <= 2.0 * v + 1e-3, "eps {} vs 2v {}", eps_oracle, 2.0 * v);
    // δ̂ is controlled by the alignment value pointwise.
    assert!(report.delta_hat <= 2.0 * v + 1e-9);
    // Bounds bracket the oracle.
    assert!(report.eps_lower <= eps_oracle + 1e-9);
    assert!(eps_oracle <= report.eps_upper + 1e-3);
}

#[test]
fn anon_concealment_monotone_over_stages() {
    let inst = anonymous_state_protocol(2, 0.3, Seed::new(103, 0)).unwrap();
    let reg = inst.register().unwrap();
    let at_commit =
        concealment_lower_at_depth(&inst.tree, &inst.a0, &inst.a1, &reg, &inst.rho0, 2).unwrap();
    for depth in 0..2usize {
        let at_stage =
            concealment_lower_at_depth(&inst.tree, &inst.a0, &inst.a1, &reg, &inst.rho0, depth)
                .unwrap();
        assert!(
            at_stage <= at_commit + 1e-9,
            "stage {} leakage {} exceeds commitment {}",
            depth,
            at_stage,
            at_commit
        );
    }
}

// ---------------------------------------------------------------------------
// Shredder
// ---------------------------------------------------------------------------

#[test]
fn shredder_identity_cheat_at_d2_is_exactly_half() {
    let inst = ShredderInstance::new(2).unwrap();
    let report = shredder_eval(&inst, &[crate::channels::Channel::identity(2)]).unwrap();
    assert!((report.success[0].0 .0 - 0.5).abs() < 1e-12);
    assert!((report.success[0].1 .0 - 0.5).abs() < 1e-12);
}

#[test]
fn shredder_success_is_one_over_d_for_any_channel() {
    for d in [2usize, 4, 8] {
        let inst = ShredderInstance::new(d).unwrap();
        let cheats: Vec<_> =
            (0..5).map(|t| random_channel(d, 3, Seed::new(104, t))).collect();
        let report = shredder_eval(&inst, &cheats).unwrap();
        for (p01, p10) in &report.success {
            assert!((p01.0 - 1.0 / d as f64).abs() < 1e-9, "d={} got {}", d, p01.0);
            assert!((p10.0 - 1.0 / d as f64).abs() < 1e-9, "d={} got {}", d, p10.0);
        }
        assert!(report.bob_marginal_deviation.0 < 1e-12);
        assert!(report.variance.0 <= 1e-18);
    }
}

// ---------------------------------------------------------------------------
// Monster
// ---------------------------------------------------------------------------

#[test]
fn monster_dilations_restrict_to_their_channels() {
    let inst = monster_build(3, 2, Seed::new(105, 0)).unwrap();
    let r_back = inst.v0.restriction_channel().unwrap();
    assert!(frobenius_norm(&(r_back.choi() - inst.r.choi())) < 1e-10);
    let s_back = inst.v1.restriction_channel().unwrap();
    assert!(frobenius_norm(&(s_back.choi() - inst.s.choi())) < 1e-10);
}

#[test]
fn monster_choi_bound_small_cases() {
    // μ = 1: exact equality 2 − 2/d².
    let inst = monster_build(4, 1, Seed::new(106, 0)).unwrap();
    let got = inst.choi_lower().unwrap();
    assert!((got - (2.0 - 2.0 / 16.0)).abs() < 1e-9, "got {}", got);

    // (d, μ) = (8, 2): at least 2 − 4/64.
    let inst = monster_build(8, 2, Seed::new(106, 1)).unwrap();
    let got = inst.choi_lower().unwrap();
    assert!(got >= 2.0 - 4.0 / 64.0 - 1e-9, "got {}", got);
}

#[test]
fn monster_passive_cheat_trivial_cases() {
    // V0 = V1: overlap 1.
    let inst = monster_build(3, 9, Seed::new(107, 0)).unwrap();
    let d = inst.d;
    let b1 = inst.v1.blocks[0].clone();
    let same = MonsterInstance {
        d,
        mu: 9,
        seed: inst.seed,
        r: inst.s.clone(),
        s: inst.s.clone(),
        v0: crate::channels::StinespringDilation::new(d, vec![b1.clone()]).unwrap(),
        v1: crate::channels::StinespringDilation::new(d, vec![b1]).unwrap(),
    };
    let p = same.passive_cheat().unwrap();
    assert!((p.p.0 - 1.0).abs() < 1e-10, "p {}", p.p.0);

    // Orthogonal ranges: probability 0.
    let u = crate::numerics::haar_unitary(2 * d, Seed::new(107, 5));
    let mut va = crate::numerics::CMatrix::zeros(2 * d, d);
    let mut vb = crate::numerics::CMatrix::zeros(2 * d, d);
    for j in 0..d {
        for i in 0..2 * d {
            va[(i, j)] = u[(i, j)];
            vb[(i, j)] = u[(i, d + j)];
        }
    }
    let orth = MonsterInstance {
        d,
        mu: 1,
        seed: inst.seed,
        r: inst.s.clone(),
        s: inst.s.clone(),
        v0: crate::channels::StinespringDilation::single(
            crate::hybrid::Label::root(),
            2,
            d,
            va,
        )
        .unwrap(),
        v1: crate::channels::StinespringDilation::single(
            crate::hybrid::Label::root(),
            2,
            d,
            vb,
        )
        .unwrap(),
    };
    let p = orth.passive_cheat().unwrap();
    assert!(p.p.0 < 1e-10, "p {}", p.p.0);
}

#[test]
fn monster_passive_cheat_bound_holds() {
    let inst = monster_build(16, 8, Seed::new(108, 0)).unwrap();
    let report = inst.passive_cheat().unwrap();
    assert!(report.bound_holds, "chain: {:?}", report.chain);
    assert!(report.p.0 <= 1.0 / 16.0 + report.delta.0 + 1e-9);
}

#[test]
fn monster_soundness_is_perfect() {
    let inst = monster_build(4, 2, Seed::new(109, 0)).unwrap();
    let (acc0, acc1) = inst.honest_acceptance().unwrap();
    assert!((acc0 - 1.0).abs() < 1e-10, "bit 0 acceptance {}", acc0);
    assert!((acc1 - 1.0).abs() < 1e-10, "bit 1 acceptance {}", acc1);
}

#[test]
fn monster_passive_embedding_matches_general_attack() {
    let inst = monster_build(4, 2, Seed::new(110, 0)).unwrap();
    let attack = inst.passive_attack().unwrap();
    let general = inst.general_attack(&attack).unwrap();
    let passive = inst.passive_cheat().unwrap();
    assert!((general.p0.0 - 1.0).abs() < 1e-10);
    assert!(
        (general.p.0 - 0.5 * (1.0 + passive.p.0)).abs() < 1e-10,
        "P {} vs ½(1+{})",
        general.p.0,
        passive.p.0
    );
}

#[test]
fn monster_random_attacks_obey_bound() {
    let inst = monster_build(8, 2, Seed::new(111, 0)).unwrap();
    for t in 0..5u64 {
        let attack = MonsterAttack::random(&inst, 3, Seed::new(112, t)).unwrap();
        let report = inst.general_attack(&attack).unwrap();
        assert!(report.bound_holds, "P {} bound {}", report.p.0, report.bound.0);
    }
}

#[test]
fn monster_record_breaker_hides_the_difference() {
    // With an entanglement-breaking channel on the record, sampled
    // distinguishability collapses to the plain-norm level.
    let inst = monster_build(4, 4, Seed::new(113, 0)).unwrap();
    let (e, _) = crate::numerics::fourier_mub(4);
    let povm: Vec<crate::numerics::CMatrix> = e.iter().map(|v| v * v.adjoint()).collect();
    let states: Vec<crate::numerics::DensityMatrix> =
        e.iter().map(|v| crate::numerics::DensityMatrix::pure(v).unwrap()).collect();
    let breaker = crate::channels::measure_prepare(&povm, &states).unwrap();
    let with_record =
        crate::channels::bystander_norm_estimate(&inst.r, &inst.s, &breaker, 6, Seed::new(113, 1))
            .unwrap();
    let plain = op_norm_estimate(&inst.r, &inst.s, 24, Seed::new(113, 2)).unwrap();
    assert!(
        with_record.value <= plain.value + 1e-6,
        "record {} vs plain {}",
        with_record.value,
        plain.value
    );
    // The coherent record tells them apart far better.
    let coherent = inst.choi_lower().unwrap();
    assert!(coherent > plain.value + 0.2, "coherent {} plain {}", coherent, plain.value);
}
