//! Anonymous-state commitment: Bob supplies a state known only to him,
//! Alice encodes her bit by conjugating the system with one of two
//! unitaries and returns it. The `leak` parameter rotates the bit-1
//! encoding along a geodesic from the identity (perfectly concealing) to a
//! fully distinguishable conjugation; the instance is the tunable test bed
//! for the cheat-synthesis bound.

use super::ProtocolInstance;
use crate::hybrid::{HybridState, Label};
use crate::numerics::{
    haar_state, identity, kron_u, max_entangled, CMatrix, CVector, DensityMatrix, Seed, C64,
};
use crate::protocol::{MsgAction, NodeAction, Owner, Phase, Strategy, TreeBuilder, Verifier};
use std::collections::BTreeMap;

/// The bit-1 encoding: diag(1, e^{iπt}) at d = 2 and
/// diag(1, e^{iπt}, e^{−iπt}) at d = 3; t = 0 is the identity and t = 1
/// admits a state mapped to an orthogonal one.
fn leak_unitary(d: usize, leak: f64) -> CMatrix {
    let mut u = CMatrix::zeros(d, d);
    u[(0, 0)] = C64::new(1.0, 0.0);
    for j in 1..d {
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        let phase = sign * std::f64::consts::PI * leak;
        u[(j, j)] = C64::new(phase.cos(), phase.sin());
    }
    u
}

/// Builds the instance at dimension d ≤ 3 with Bob's register holding the
/// maximally entangled preparation and two seeded Haar preparations.
pub fn anonymous_state_protocol(
    d: usize,
    leak: f64,
    seed: Seed,
) -> crate::error::Result<ProtocolInstance> {
    if !(2..=3).contains(&d) {
        return Err(crate::error::Error::Config(
            "anonymous-state instance supports d in {2, 3}".into(),
        ));
    }
    if !(0.0..=1.0).contains(&leak) {
        return Err(crate::error::Error::Config("leak must lie in [0, 1]".into()));
    }
    let tree = TreeBuilder::new((1, 1))
        .node(Label::root(), vec![(0, d)], Phase::Commit)
        .node(Label(vec![0]), vec![(0, d)], Phase::Commit)
        .node(Label(vec![0, 0]), vec![(0, 1)], Phase::Commit)
        .node(Label(vec![0, 0, 0]), vec![(0, 1), (1, 1)], Phase::Open)
        .node(Label(vec![0, 0, 0, 0]), vec![], Phase::Open)
        .node(Label(vec![0, 0, 0, 1]), vec![], Phase::Open)
        .commit_leaf(Label(vec![0, 0]))
        .build()?;

    let alice = |bit: u8| -> Strategy {
        let u = if bit == 0 { identity(d) } else { leak_unitary(d, leak) };
        let mut actions = BTreeMap::new();
        actions.insert(
            Label(vec![0]),
            NodeAction { branches: vec![MsgAction { symbol: 0, ret_dim: 1, kraus: vec![u] }] },
        );
        let all = [(0u16, 1usize), (1u16, 1usize)];
        actions.insert(
            Label(vec![0, 0, 0]),
            NodeAction::deterministic(bit as u16, 1, identity(1), &all),
        );
        Strategy::new(Owner::Alice, actions)
    };

    // Bob's preparations ψ_b on (sent system) ⊗ (kept reference).
    let preparations: Vec<CVector> = vec![
        max_entangled(d),
        haar_state(d * d, seed.child(1)),
        haar_state(d * d, seed.child(2)),
    ];
    let bobs: Vec<Strategy> = preparations
        .iter()
        .map(|psi| {
            let mut prep = CMatrix::zeros(d * d, 1);
            for i in 0..d * d {
                prep[(i, 0)] = psi[i];
            }
            let mut actions = BTreeMap::new();
            actions.insert(
                Label::root(),
                NodeAction {
                    branches: vec![MsgAction { symbol: 0, ret_dim: d, kraus: vec![prep] }],
                },
            );
            actions.insert(
                Label(vec![0, 0]),
                NodeAction {
                    branches: vec![MsgAction {
                        symbol: 0,
                        ret_dim: d * d,
                        kraus: vec![identity(d * d)],
                    }],
                },
            );
            Strategy::new(Owner::Bob, actions)
        })
        .collect();
    let s = bobs.len();

    // Verifier: at leaf k Bob projects onto (U_k ⊗ 1)ψ_b, conditioned on
    // his own preparation through the register.
    let mut povms = BTreeMap::new();
    for bit in 0..2u16 {
        let u = if bit == 0 { identity(d) } else { leak_unitary(d, leak) };
        let mut accept = CMatrix::zeros(d * d * s, d * d * s);
        for (b, psi) in preparations.iter().enumerate() {
            let rotated = kron_u(&u, &identity(d)) * psi;
            let proj = &rotated * rotated.adjoint();
            let mut reg = CMatrix::zeros(s, s);
            reg[(b, b)] = C64::new(1.0, 0.0);
            accept += kron_u(&proj, &reg);
        }
        let zero = CMatrix::zeros(d * d * s, d * d * s);
        let povm = if bit == 0 { [accept, zero] } else { [zero, accept] };
        povms.insert(Label(vec![0, 0, 0, bit]), povm);
    }

    Ok(ProtocolInstance {
        name: format!("anon-d{}-leak{}", d, leak),
        tree,
        a0: alice(0),
        a1: alice(1),
        bobs,
        rho0: HybridState::single(DensityMatrix::new(identity(1))?),
        verifier: Verifier { povms },
    })
}
