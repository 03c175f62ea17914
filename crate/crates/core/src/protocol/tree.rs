//! Communication trees: the classical skeleton of a protocol.

use crate::error::{Error, Result};
use crate::hybrid::Label;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Owner {
    Alice,
    Bob,
}

impl Owner {
    /// Bob always starts; turns alternate with depth.
    pub fn of_depth(depth: usize) -> Owner {
        if depth % 2 == 0 {
            Owner::Bob
        } else {
            Owner::Alice
        }
    }

    pub fn other(self) -> Owner {
        match self {
            Owner::Alice => Owner::Bob,
            Owner::Bob => Owner::Alice,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Commit,
    Hold,
    Open,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MessageSpec {
    pub symbol: u16,
    pub dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Node {
    pub messages: Vec<MessageSpec>,
    pub phase: Phase,
}

/// The tree of classical message histories. Each node knows its admissible
/// message symbols and the dimension of the quantum system accompanying
/// each; owners alternate with Bob at the root. Commitment leaves mark
/// where the commitment phase ends.
#[derive(Debug, Clone)]
pub struct CommunicationTree {
    nodes: BTreeMap<Label, Node>,
    commit_leaves: BTreeSet<Label>,
    final_leaves: BTreeSet<Label>,
    root_dims: (usize, usize),
}

impl CommunicationTree {
    pub fn new(
        nodes: BTreeMap<Label, Node>,
        commit_leaves: BTreeSet<Label>,
        root_dims: (usize, usize),
    ) -> Result<Self> {
        if !nodes.contains_key(&Label::root()) {
            return Err(Error::Protocol { path: "ε".into(), reason: "missing root".into() });
        }
        if root_dims.0 == 0 || root_dims.1 == 0 {
            return Err(Error::Protocol { path: "ε".into(), reason: "zero root dims".into() });
        }
        let mut final_leaves = BTreeSet::new();
        for (label, node) in &nodes {
            let mut seen = BTreeSet::new();
            for m in &node.messages {
                if m.dim == 0 {
                    return Err(Error::Protocol {
                        path: label.to_string(),
                        reason: format!("message {} has dimension 0", m.symbol),
                    });
                }
                if !seen.insert(m.symbol) {
                    return Err(Error::Protocol {
                        path: label.to_string(),
                        reason: format!("duplicate message symbol {}", m.symbol),
                    });
                }
                let child = label.child(m.symbol);
                if !nodes.contains_key(&child) {
                    return Err(Error::Protocol {
                        path: child.to_string(),
                        reason: "child node missing".into(),
                    });
                }
            }
            if node.messages.is_empty() {
                final_leaves.insert(label.clone());
            }
            // Non-root nodes need their parent present and listing them.
            if let Some((parent, symbol)) = label.parent() {
                let p = nodes.get(&parent).ok_or_else(|| Error::Protocol {
                    path: parent.to_string(),
                    reason: "parent node missing".into(),
                })?;
                if !p.messages.iter().any(|m| m.symbol == symbol) {
                    return Err(Error::Protocol {
                        path: label.to_string(),
                        reason: "not listed among parent messages".into(),
                    });
                }
            }
        }
        // Commitment leaves: all ancestors in commit phase, descendants in
        // hold/open only, and every final leaf below exactly one of them.
        for c in &commit_leaves {
            let node = nodes.get(c).ok_or_else(|| Error::Protocol {
                path: c.to_string(),
                reason: "commitment leaf not in tree".into(),
            })?;
            if node.phase != Phase::Commit {
                return Err(Error::Protocol {
                    path: c.to_string(),
                    reason: "commitment leaf not tagged commit".into(),
                });
            }
            if node.messages.is_empty() {
                return Err(Error::Protocol {
                    path: c.to_string(),
                    reason: "commitment leaf terminates the tree; opening rounds missing".into(),
                });
            }
        }
        for (label, node) in &nodes {
            let under_commit = commit_leaves.iter().any(|c| c.is_prefix_of(label) && c != label);
            if under_commit && node.phase == Phase::Commit {
                return Err(Error::Protocol {
                    path: label.to_string(),
                    reason: "commit-phase node below a commitment leaf".into(),
                });
            }
            if !under_commit && !commit_leaves.contains(label) && node.phase != Phase::Commit {
                // Hold/open nodes must sit below a commitment leaf.
                if node.messages.is_empty() || !label.0.is_empty() {
                    let covered = commit_leaves.iter().any(|c| c.is_prefix_of(label));
                    if !covered {
                        return Err(Error::Protocol {
                            path: label.to_string(),
                            reason: "hold/open node not dominated by a commitment leaf".into(),
                        });
                    }
                }
            }
            // A leaf that is not an opening endpoint is a dead end.
            if node.messages.is_empty() && node.phase != Phase::Open {
                return Err(Error::Protocol {
                    path: label.to_string(),
                    reason: "empty-message node outside the opening phase".into(),
                });
            }
        }
        for leaf in &final_leaves {
            if !commit_leaves.iter().any(|c| c.is_prefix_of(leaf)) {
                return Err(Error::Protocol {
                    path: leaf.to_string(),
                    reason: "final leaf is not below any commitment leaf".into(),
                });
            }
        }
        Ok(CommunicationTree { nodes, commit_leaves, final_leaves, root_dims })
    }

    pub fn node(&self, label: &Label) -> Option<&Node> {
        self.nodes.get(label)
    }

    pub fn nodes(&self) -> &BTreeMap<Label, Node> {
        &self.nodes
    }

    pub fn owner(&self, label: &Label) -> Owner {
        Owner::of_depth(label.depth())
    }

    pub fn commit_leaves(&self) -> &BTreeSet<Label> {
        &self.commit_leaves
    }

    pub fn final_leaves(&self) -> &BTreeSet<Label> {
        &self.final_leaves
    }

    pub fn root_dims(&self) -> (usize, usize) {
        self.root_dims
    }

    pub fn message_dim(&self, label: &Label, symbol: u16) -> Result<usize> {
        self.nodes
            .get(label)
            .and_then(|n| n.messages.iter().find(|m| m.symbol == symbol))
            .map(|m| m.dim)
            .ok_or_else(|| Error::Protocol {
                path: label.to_string(),
                reason: format!("no message {}", symbol),
            })
    }

    /// Canonical per-node lab dimensions: the root dimension multiplied by
    /// every message dimension along the path, for either party.
    pub fn canonical_schedule(&self) -> DimensionSchedule {
        let mut alice = BTreeMap::new();
        let mut bob = BTreeMap::new();
        for label in self.nodes.keys() {
            let mut da = self.root_dims.0;
            let mut db = self.root_dims.1;
            let mut prefix = Label::root();
            for &m in &label.0 {
                let d = self
                    .message_dim(&prefix, m)
                    .expect("validated tree");
                da *= d;
                db *= d;
                prefix = prefix.child(m);
            }
            alice.insert(label.clone(), da);
            bob.insert(label.clone(), db);
        }
        DimensionSchedule { alice, bob }
    }
}

/// Canonical lab dimensions per node for both parties.
#[derive(Debug, Clone)]
pub struct DimensionSchedule {
    pub alice: BTreeMap<Label, usize>,
    pub bob: BTreeMap<Label, usize>,
}

impl DimensionSchedule {
    pub fn of(&self, owner: Owner, label: &Label) -> usize {
        match owner {
            Owner::Alice => self.alice[label],
            Owner::Bob => self.bob[label],
        }
    }
}

/// Convenience builder for trees described level by level.
pub struct TreeBuilder {
    nodes: BTreeMap<Label, Node>,
    commit_leaves: BTreeSet<Label>,
    root_dims: (usize, usize),
}

impl TreeBuilder {
    pub fn new(root_dims: (usize, usize)) -> Self {
        TreeBuilder { nodes: BTreeMap::new(), commit_leaves: BTreeSet::new(), root_dims }
    }

    pub fn node(mut self, label: Label, messages: Vec<(u16, usize)>, phase: Phase) -> Self {
        self.nodes.insert(
            label,
            Node {
                messages: messages
                    .into_iter()
                    .map(|(symbol, dim)| MessageSpec { symbol, dim })
                    .collect(),
                phase,
            },
        );
        self
    }

    pub fn commit_leaf(mut self, label: Label) -> Self {
        self.commit_leaves.insert(label);
        self
    }

    pub fn build(self) -> Result<CommunicationTree> {
        CommunicationTree::new(self.nodes, self.commit_leaves, self.root_dims)
    }
}
