//! Versioned JSON protocol definitions: tree, strategies, initial state and
//! verifier POVM. Matrices serialize as row-major [re, im] pairs rendered
//! as 17-significant-digit decimal strings, so files round-trip bit-exactly.

use super::nogo::Verifier;
use super::strategy::{MsgAction, NodeAction, Strategy};
use super::tree::{CommunicationTree, Node, Owner, Phase};
use crate::error::{Error, Result};
use crate::hybrid::{HybridState, Label};
use crate::numerics::{CMatrix, DensityMatrix, C64};
use crate::report::F17;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixDef {
    pub rows: usize,
    pub cols: usize,
    /// Row-major entries as [re, im] pairs.
    pub entries: Vec<[F17; 2]>,
}

impl MatrixDef {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let mut entries = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                entries.push([F17(m[(i, j)].re), F17(m[(i, j)].im)]);
            }
        }
        MatrixDef { rows: m.nrows(), cols: m.ncols(), entries }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.entries.len() != self.rows * self.cols {
            return Err(Error::Config(format!(
                "matrix defined with {} entries for {}x{}",
                self.entries.len(),
                self.rows,
                self.cols
            )));
        }
        let mut m = CMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let e = &self.entries[i * self.cols + j];
                m[(i, j)] = C64::new(e[0].0, e[1].0);
            }
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeDef {
    pub label: Label,
    pub owner: Owner,
    pub phase: Phase,
    /// (symbol, message dimension) pairs.
    pub messages: Vec<(u16, usize)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionDef {
    pub label: Label,
    pub branches: Vec<BranchDef>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchDef {
    pub symbol: u16,
    pub ret_dim: usize,
    pub kraus: Vec<MatrixDef>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategyDef {
    pub player: Owner,
    pub actions: Vec<ActionDef>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifierDef {
    pub leaf: Label,
    pub accept0: MatrixDef,
    pub accept1: MatrixDef,
}

/// A complete protocol definition file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolDef {
    pub schema_version: u32,
    pub name: String,
    pub root_dims: (usize, usize),
    pub nodes: Vec<NodeDef>,
    pub commit_leaves: Vec<Label>,
    pub alice0: StrategyDef,
    pub alice1: StrategyDef,
    pub bobs: Vec<StrategyDef>,
    pub initial_state: MatrixDef,
    pub verifier: Vec<VerifierDef>,
}

fn strategy_to_def(s: &Strategy) -> StrategyDef {
    StrategyDef {
        player: s.player,
        actions: s
            .actions
            .iter()
            .map(|(label, action)| ActionDef {
                label: label.clone(),
                branches: action
                    .branches
                    .iter()
                    .map(|b| BranchDef {
                        symbol: b.symbol,
                        ret_dim: b.ret_dim,
                        kraus: b.kraus.iter().map(MatrixDef::from_matrix).collect(),
                    })
                    .collect(),
            })
            .collect(),
    }
}

fn strategy_from_def(def: &StrategyDef) -> Result<Strategy> {
    let mut actions = BTreeMap::new();
    for a in &def.actions {
        let branches = a
            .branches
            .iter()
            .map(|b| {
                Ok(MsgAction {
                    symbol: b.symbol,
                    ret_dim: b.ret_dim,
                    kraus: b.kraus.iter().map(|m| m.to_matrix()).collect::<Result<Vec<_>>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        actions.insert(a.label.clone(), NodeAction { branches });
    }
    Ok(Strategy { player: def.player, actions })
}

impl ProtocolDef {
    pub fn from_parts(
        name: &str,
        tree: &CommunicationTree,
        a0: &Strategy,
        a1: &Strategy,
        bobs: &[Strategy],
        rho0: &HybridState,
        verifier: &Verifier,
    ) -> Result<Self> {
        let root = rho0
            .branch(&Label::root())
            .ok_or_else(|| Error::Structure("initial state must sit at the root".into()))?;
        Ok(ProtocolDef {
            schema_version: SCHEMA_VERSION,
            name: name.into(),
            root_dims: tree.root_dims(),
            nodes: tree
                .nodes()
                .iter()
                .map(|(label, node)| NodeDef {
                    label: label.clone(),
                    owner: tree.owner(label),
                    phase: node.phase,
                    messages: node.messages.iter().map(|m| (m.symbol, m.dim)).collect(),
                })
                .collect(),
            commit_leaves: tree.commit_leaves().iter().cloned().collect(),
            alice0: strategy_to_def(a0),
            alice1: strategy_to_def(a1),
            bobs: bobs.iter().map(strategy_to_def).collect(),
            initial_state: MatrixDef::from_matrix(root.state.matrix()),
            verifier: verifier
                .povms
                .iter()
                .map(|(leaf, povm)| VerifierDef {
                    leaf: leaf.clone(),
                    accept0: MatrixDef::from_matrix(&povm[0]),
                    accept1: MatrixDef::from_matrix(&povm[1]),
                })
                .collect(),
        })
    }

    pub fn to_parts(
        &self,
    ) -> Result<(CommunicationTree, Strategy, Strategy, Vec<Strategy>, HybridState, Verifier)>
    {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema version {} (expected {})",
                self.schema_version, SCHEMA_VERSION
            )));
        }
        let mut nodes = BTreeMap::new();
        for n in &self.nodes {
            if Owner::of_depth(n.label.depth()) != n.owner {
                return Err(Error::Protocol {
                    path: n.label.to_string(),
                    reason: "owner does not alternate from Bob at the root".into(),
                });
            }
            nodes.insert(
                n.label.clone(),
                Node {
                    messages: n
                        .messages
                        .iter()
                        .map(|&(symbol, dim)| super::tree::MessageSpec { symbol, dim })
                        .collect(),
                    phase: n.phase,
                },
            );
        }
        let commit: BTreeSet<Label> = self.commit_leaves.iter().cloned().collect();
        let tree = CommunicationTree::new(nodes, commit, self.root_dims)?;
        let a0 = strategy_from_def(&self.alice0)?;
        let a1 = strategy_from_def(&self.alice1)?;
        let bobs = self.bobs.iter().map(strategy_from_def).collect::<Result<Vec<_>>>()?;
        let rho0 = HybridState::single(DensityMatrix::new(self.initial_state.to_matrix()?)?);
        let mut povms = BTreeMap::new();
        for v in &self.verifier {
            povms.insert(v.leaf.clone(), [v.accept0.to_matrix()?, v.accept1.to_matrix()?]);
        }
        Ok((tree, a0, a1, bobs, rho0, Verifier { povms }))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
