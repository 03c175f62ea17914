//! Local purification: converts any strategy into a locally coherent one
//! with the same counterpart-visible behavior, keeping every measurement
//! ancilla. The revert operation (tracing the ancillas) restores the honest
//! lab state at any node.

use super::strategy::{MsgAction, NodeAction, Strategy};
use super::tree::{CommunicationTree, Owner};
use crate::error::{Error, Result};
use crate::hybrid::Label;
use crate::numerics::{CMatrix, C64};
use std::collections::BTreeMap;

/// One tensor factor of a purified lab, in layout order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    /// A factor the honest strategy also holds (original lab or received
    /// message), with its dimension.
    Honest(usize),
    /// A purification ancilla recording which Kraus branch fired.
    Ancilla(usize),
}

impl Factor {
    fn dim(&self) -> usize {
        match self {
            Factor::Honest(d) | Factor::Ancilla(d) => *d,
        }
    }
}

/// A coherent strategy together with the bookkeeping needed to revert to
/// the honest one: the factor layout of the purified lab at every node.
#[derive(Debug, Clone)]
pub struct PurifiedStrategy {
    pub strategy: Strategy,
    pub layouts: BTreeMap<Label, Vec<Factor>>,
}

impl PurifiedStrategy {
    pub fn lab_dim(&self, label: &Label) -> usize {
        self.layouts[label].iter().map(|f| f.dim()).product()
    }

    pub fn honest_dim(&self, label: &Label) -> usize {
        self.layouts[label]
            .iter()
            .filter(|f| matches!(f, Factor::Honest(_)))
            .map(|f| f.dim())
            .product()
    }

    /// Kraus operators of the revert channel at a node: trace out every
    /// ancilla factor, keeping the honest factors in order.
    pub fn revert_kraus(&self, label: &Label) -> Result<Vec<CMatrix>> {
        let layout = self.layouts.get(label).ok_or_else(|| Error::Protocol {
            path: label.to_string(),
            reason: "no purification layout at this node".into(),
        })?;
        Ok(trace_ancilla_kraus(layout))
    }
}

/// Selector Kraus {(1_honest ⊗ ⟨e|_anc) P_layout}: one operator per joint
/// ancilla basis state.
fn trace_ancilla_kraus(layout: &[Factor]) -> Vec<CMatrix> {
    let total: usize = layout.iter().map(|f| f.dim()).product();
    let honest: usize = layout
        .iter()
        .filter(|f| matches!(f, Factor::Honest(_)))
        .map(|f| f.dim())
        .product();
    let anc: usize = layout
        .iter()
        .filter(|f| matches!(f, Factor::Ancilla(_)))
        .map(|f| f.dim())
        .product();
    let mut kraus = vec![CMatrix::zeros(honest, total); anc];
    for p in 0..total {
        let (h, e) = split_index(layout, p);
        kraus[e][(h, p)] = C64::new(1.0, 0.0);
    }
    kraus
}

/// Splits a flat layout index into (honest multi-index, ancilla multi-index),
/// both in layout order.
fn split_index(layout: &[Factor], mut p: usize) -> (usize, usize) {
    let mut digits = Vec::with_capacity(layout.len());
    for f in layout.iter().rev() {
        digits.push(p % f.dim());
        p /= f.dim();
    }
    digits.reverse();
    let mut h = 0usize;
    let mut e = 0usize;
    for (f, d) in layout.iter().zip(digits) {
        match f {
            Factor::Honest(dim) => h = h * dim + d,
            Factor::Ancilla(dim) => e = e * dim + d,
        }
    }
    (h, e)
}

/// Gathering permutation: maps the flat layout index to h·anc + e.
fn gather_indices(layout: &[Factor]) -> Vec<(usize, usize)> {
    let total: usize = layout.iter().map(|f| f.dim()).product();
    (0..total).map(|p| split_index(layout, p)).collect()
}

/// Converts a strategy to a locally coherent one. Every Kraus branch at an
/// owned node becomes one ancilla dimension; the counterpart's restricted
/// state is unchanged at every stage, and the revert channels (ancilla
/// traces) restore the honest lab exactly.
pub fn purify(tree: &CommunicationTree, strategy: &Strategy) -> Result<PurifiedStrategy> {
    let player = strategy.player;
    let mut layouts: BTreeMap<Label, Vec<Factor>> = BTreeMap::new();
    let root_dim = match player {
        Owner::Alice => tree.root_dims().0,
        Owner::Bob => tree.root_dims().1,
    };
    layouts.insert(Label::root(), vec![Factor::Honest(root_dim)]);
    let mut honest_dims: BTreeMap<Label, usize> = BTreeMap::new();
    honest_dims.insert(Label::root(), root_dim);

    let mut actions: BTreeMap<Label, NodeAction> = BTreeMap::new();
    for (label, node) in tree.nodes() {
        if node.messages.is_empty() {
            continue;
        }
        let layout = layouts
            .get(label)
            .ok_or_else(|| Error::Protocol {
                path: label.to_string(),
                reason: "unreachable node during purification".into(),
            })?
            .clone();
        let honest_here = honest_dims[label];
        if tree.owner(label) != player {
            // Receiving: the message joins the lab as an honest factor,
            // prepended for Bob, appended for Alice.
            for m in &node.messages {
                let mut next = layout.clone();
                match player {
                    Owner::Alice => next.push(Factor::Honest(m.dim)),
                    Owner::Bob => next.insert(0, Factor::Honest(m.dim)),
                }
                layouts.insert(label.child(m.symbol), next);
                honest_dims.insert(label.child(m.symbol), honest_here * m.dim);
            }
            continue;
        }

        let action = strategy.action(label)?;
        let anc_dim: usize = layout
            .iter()
            .filter(|f| matches!(f, Factor::Ancilla(_)))
            .map(|f| f.dim())
            .product();
        let total_in: usize = layout.iter().map(|f| f.dim()).product();
        let gather = gather_indices(&layout);
        let mut branches = Vec::with_capacity(action.branches.len());
        for branch in &action.branches {
            let msg_dim = tree.message_dim(label, branch.symbol)?;
            let kappa = branch.kraus.len();
            let ret_total = branch.ret_dim * anc_dim * kappa;
            // Output rows: Alice (ret, anc_old, kappa, msg); Bob (msg, ret,
            // anc_old, kappa). Input columns: the raw layout index.
            let mut v = CMatrix::zeros(ret_total * msg_dim, total_in);
            for (p, &(h, e)) in gather.iter().enumerate() {
                if h >= honest_here {
                    return Err(Error::Protocol {
                        path: label.to_string(),
                        reason: "layout/honest dimension mismatch".into(),
                    });
                }
                for (k_idx, k) in branch.kraus.iter().enumerate() {
                    for r in 0..branch.ret_dim {
                        for mm in 0..msg_dim {
                            let amp = match player {
                                Owner::Alice => k[(r * msg_dim + mm, h)],
                                Owner::Bob => k[(mm * branch.ret_dim + r, h)],
                            };
                            if amp.norm_sqr() == 0.0 {
                                continue;
                            }
                            let ret_idx = (r * anc_dim + e) * kappa + k_idx;
                            let row = match player {
                                Owner::Alice => ret_idx * msg_dim + mm,
                                Owner::Bob => mm * ret_total + ret_idx,
                            };
                            v[(row, p)] += amp;
                        }
                    }
                }
            }
            branches.push(MsgAction { symbol: branch.symbol, ret_dim: ret_total, kraus: vec![v] });
            let next_layout = vec![
                Factor::Honest(branch.ret_dim),
                Factor::Ancilla(anc_dim.max(1)),
                Factor::Ancilla(kappa),
            ];
            layouts.insert(label.child(branch.symbol), next_layout);
            honest_dims.insert(label.child(branch.symbol), branch.ret_dim);
        }
        actions.insert(label.clone(), NodeAction { branches });
    }

    Ok(PurifiedStrategy { strategy: Strategy { player, actions }, layouts })
}
