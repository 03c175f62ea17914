//! Player strategies: one action per owned node, each action a per-message
//! Kraus set or a single isometry block per message.

use super::tree::{CommunicationTree, DimensionSchedule, Owner};
use crate::error::{Error, Result};
use crate::hybrid::Label;
use crate::numerics::{identity, CMatrix, CHANNEL_TOL};
use std::collections::BTreeMap;

/// Action branch for one message symbol.
///
/// Kraus operators map the owner's current lab to retained ⊗ message at
/// Alice's nodes and to message ⊗ retained at Bob's nodes, matching the
/// global ordering Alice ⊗ Message ⊗ Bob.
#[derive(Debug, Clone)]
pub struct MsgAction {
    pub symbol: u16,
    pub ret_dim: usize,
    pub kraus: Vec<CMatrix>,
}

#[derive(Debug, Clone)]
pub struct NodeAction {
    pub branches: Vec<MsgAction>,
}

impl NodeAction {
    pub fn is_coherent(&self) -> bool {
        self.branches.iter().all(|b| b.kraus.len() == 1)
    }

    /// Single deterministic message carrying an isometry.
    pub fn deterministic(symbol: u16, ret_dim: usize, v: CMatrix, all_symbols: &[(u16, usize)]) -> Self {
        let in_dim = v.ncols();
        let branches = all_symbols
            .iter()
            .map(|&(m, dim)| {
                if m == symbol {
                    MsgAction { symbol: m, ret_dim, kraus: vec![v.clone()] }
                } else {
                    MsgAction { symbol: m, ret_dim: 1, kraus: vec![CMatrix::zeros(dim, in_dim)] }
                }
            })
            .collect();
        NodeAction { branches }
    }
}

#[derive(Debug, Clone)]
pub struct Strategy {
    pub player: Owner,
    pub actions: BTreeMap<Label, NodeAction>,
}

impl Strategy {
    pub fn new(player: Owner, actions: BTreeMap<Label, NodeAction>) -> Self {
        Strategy { player, actions }
    }

    pub fn is_coherent(&self) -> bool {
        self.actions.values().all(|a| a.is_coherent())
    }

    pub fn action(&self, label: &Label) -> Result<&NodeAction> {
        self.actions.get(label).ok_or_else(|| Error::Protocol {
            path: label.to_string(),
            reason: "strategy has no action for this node".into(),
        })
    }
}

/// Actual lab dimensions reached by a (validated) strategy.
#[derive(Debug, Clone)]
pub struct LabDims {
    pub dims: BTreeMap<Label, usize>,
}

/// Checks one strategy against the tree: the action at every owned
/// non-leaf node must cover the tree's message symbols with consistent
/// shapes and complete Kraus sets. Returns the actual lab dimensions.
///
/// With `enforce_schedule`, coherent strategies may not exceed the
/// canonical dimension schedule; reduction subspaces (dimensions strictly
/// below canonical) are always permitted and recorded implicitly in the
/// returned dims.
pub fn validate_strategy(
    tree: &CommunicationTree,
    strategy: &Strategy,
    schedule: &DimensionSchedule,
    enforce_schedule: bool,
) -> Result<LabDims> {
    let mut dims = BTreeMap::new();
    let root_dim = match strategy.player {
        Owner::Alice => tree.root_dims().0,
        Owner::Bob => tree.root_dims().1,
    };
    dims.insert(Label::root(), root_dim);
    // Tree nodes in label order are parents-before-children along each path.
    for (label, node) in tree.nodes() {
        if node.messages.is_empty() {
            continue;
        }
        let here = *dims.get(label).ok_or_else(|| Error::Protocol {
            path: label.to_string(),
            reason: "unreachable node during validation".into(),
        })?;
        if tree.owner(label) == strategy.player {
            let action = strategy.action(label)?;
            let mut symbols: Vec<u16> = action.branches.iter().map(|b| b.symbol).collect();
            symbols.sort_unstable();
            let mut expected: Vec<u16> = node.messages.iter().map(|m| m.symbol).collect();
            expected.sort_unstable();
            if symbols != expected {
                return Err(Error::Protocol {
                    path: label.to_string(),
                    reason: format!("action covers messages {:?}, tree has {:?}", symbols, expected),
                });
            }
            let mut completeness = CMatrix::zeros(here, here);
            for branch in &action.branches {
                let msg_dim = tree.message_dim(label, branch.symbol)?;
                for k in &branch.kraus {
                    if k.nrows() != branch.ret_dim * msg_dim || k.ncols() != here {
                        return Err(Error::Protocol {
                            path: label.to_string(),
                            reason: format!(
                                "Kraus for message {} is {}x{}, expected {}x{}",
                                branch.symbol,
                                k.nrows(),
                                k.ncols(),
                                branch.ret_dim * msg_dim,
                                here
                            ),
                        });
                    }
                    completeness += k.adjoint() * k;
                }
                if enforce_schedule && action.is_coherent() {
                    let cap = schedule.of(strategy.player, &label.child(branch.symbol));
                    if branch.ret_dim > cap {
                        return Err(Error::Protocol {
                            path: label.to_string(),
                            reason: format!(
                                "coherent retained dim {} exceeds canonical schedule {}",
                                branch.ret_dim, cap
                            ),
                        });
                    }
                }
                dims.insert(label.child(branch.symbol), branch.ret_dim);
            }
            let dev =
                crate::numerics::frobenius_norm(&(completeness - identity(here)));
            if dev > CHANNEL_TOL * (here as f64).sqrt().max(1.0) {
                return Err(Error::InvalidChannel(format!(
                    "strategy action at [{}] is not trace preserving: ‖ΣK†K − 1‖ = {:.3e}",
                    label, dev
                )));
            }
        } else {
            // Receiving a message grows the lab by the message factor.
            for m in &node.messages {
                dims.insert(label.child(m.symbol), here * m.dim);
            }
        }
    }
    Ok(LabDims { dims })
}

/// Validates the honest triple and returns the canonical schedule.
pub fn validate(
    tree: &CommunicationTree,
    alice: &Strategy,
    bob: &Strategy,
) -> Result<DimensionSchedule> {
    if alice.player != Owner::Alice || bob.player != Owner::Bob {
        return Err(Error::Config("strategies assigned to wrong players".into()));
    }
    let schedule = tree.canonical_schedule();
    validate_strategy(tree, alice, &schedule, true)?;
    validate_strategy(tree, bob, &schedule, true)?;
    Ok(schedule)
}
