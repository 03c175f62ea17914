//! The one-round Bell-state commitment: Alice prepares one of two
//! orthogonal Bell states and sends half; the states have the same
//! restriction on Bob's side, so the protocol is perfectly concealing, and
//! the basis-change connecting them on Alice's side is her sneak flip.

use super::ProtocolInstance;
use crate::hybrid::{HybridState, Label};
use crate::numerics::{identity, kron_u, CMatrix, CVector, DensityMatrix, C64};
use crate::protocol::{MsgAction, NodeAction, Owner, Phase, Strategy, TreeBuilder, Verifier};
use std::collections::BTreeMap;

fn bell_vector(sign: f64) -> CVector {
    let s = 1.0 / 2f64.sqrt();
    CVector::from_vec(vec![
        C64::new(s, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(sign * s, 0.0),
    ])
}

/// Builds the Bell instance with `num_bobs` interchangeable dummy Bob
/// strategies in the register (Bob has no real choices here).
pub fn bell_protocol(num_bobs: usize) -> ProtocolInstance {
    let tree = TreeBuilder::new((1, 1))
        .node(Label::root(), vec![(0, 1)], Phase::Commit)
        .node(Label(vec![0]), vec![(0, 2)], Phase::Commit)
        .node(Label(vec![0, 0]), vec![(0, 1)], Phase::Commit)
        .node(Label(vec![0, 0, 0]), vec![(0, 2), (1, 2)], Phase::Open)
        .node(Label(vec![0, 0, 0, 0]), vec![], Phase::Open)
        .node(Label(vec![0, 0, 0, 1]), vec![], Phase::Open)
        .commit_leaf(Label(vec![0, 0]))
        .build()
        .expect("bell tree");

    let alice = |bit: u8| -> Strategy {
        let phi = bell_vector(if bit == 0 { 1.0 } else { -1.0 });
        let mut prep = CMatrix::zeros(4, 1);
        for i in 0..4 {
            prep[(i, 0)] = phi[i];
        }
        let mut actions = BTreeMap::new();
        actions.insert(
            Label(vec![0]),
            NodeAction { branches: vec![MsgAction { symbol: 0, ret_dim: 2, kraus: vec![prep] }] },
        );
        // Opening: announce the bit and hand over the retained half.
        let all = [(0u16, 2usize), (1u16, 2usize)];
        actions.insert(
            Label(vec![0, 0, 0]),
            NodeAction::deterministic(bit as u16, 1, identity(2), &all),
        );
        Strategy::new(Owner::Alice, actions)
    };

    let bob = {
        let mut actions = BTreeMap::new();
        actions.insert(
            Label::root(),
            NodeAction {
                branches: vec![MsgAction { symbol: 0, ret_dim: 1, kraus: vec![identity(1)] }],
            },
        );
        actions.insert(
            Label(vec![0, 0]),
            NodeAction {
                branches: vec![MsgAction { symbol: 0, ret_dim: 2, kraus: vec![identity(2)] }],
            },
        );
        Strategy::new(Owner::Bob, actions)
    };
    let bobs = vec![bob; num_bobs.max(1)];
    let s = bobs.len();

    // At leaf [0,0,0,k] Bob holds (Alice's half) ⊗ (his half) ⊗ register;
    // he verifies the claimed Bell state.
    let mut povms = BTreeMap::new();
    for bit in 0..2u16 {
        let phi = bell_vector(if bit == 0 { 1.0 } else { -1.0 });
        let proj = kron_u(&(&phi * phi.adjoint()), &identity(s));
        let zero = CMatrix::zeros(4 * s, 4 * s);
        let povm = if bit == 0 { [proj, zero] } else { [zero, proj] };
        povms.insert(Label(vec![0, 0, 0, bit]), povm);
    }

    ProtocolInstance {
        name: "bell".into(),
        tree,
        a0: alice(0),
        a1: alice(1),
        bobs,
        rho0: HybridState::single(DensityMatrix::new(identity(1)).expect("trivial state")),
        verifier: Verifier { povms },
    }
}
