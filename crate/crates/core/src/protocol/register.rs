//! Bob's strategy register: a finite set S of locally coherent strategies
//! driven by controlled step operators Σ_b V(b) ⊗ |b⟩⟨b| on ℓ²(S), plus
//! the global commit-time isometries of a coherent protocol.

use super::strategy::{validate_strategy, Strategy};
use super::tree::{CommunicationTree, Owner};
use crate::channels::{Channel, ChannelBlock, DilationBlock, StinespringDilation};
use crate::error::{Error, Result};
use crate::hybrid::Label;
use crate::numerics::{hermitian_eigen, CMatrix, CVector, C64};

/// A finite strategy set for Bob, padded onto the canonical dimension
/// schedule so all members share the same lab spaces.
#[derive(Debug, Clone)]
pub struct StrategyRegister {
    members: Vec<Strategy>,
}

impl StrategyRegister {
    /// Validates that every member is a coherent Bob strategy and pads all
    /// retained dimensions up to the canonical schedule (embedding; the
    /// spare input dimensions route isometrically into spare outputs of the
    /// first message so completeness survives).
    pub fn new(tree: &CommunicationTree, members: Vec<Strategy>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Config("strategy register needs at least one member".into()));
        }
        let schedule = tree.canonical_schedule();
        let mut padded = Vec::with_capacity(members.len());
        for m in members {
            if m.player != Owner::Bob {
                return Err(Error::Config("register members must be Bob strategies".into()));
            }
            if !m.is_coherent() {
                return Err(Error::Config(
                    "register members must be locally coherent (purify first)".into(),
                ));
            }
            validate_strategy(tree, &m, &schedule, true)?;
            padded.push(pad_to_schedule(tree, &m)?);
        }
        Ok(StrategyRegister { members: padded })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Strategy] {
        &self.members
    }

    /// Per-message controlled operators at a Bob node, as Kraus triples for
    /// the run engine: Ṽ_m = Σ_b V_m(b) ⊗ |b⟩⟨b|, extended by an inert
    /// record factor of dimension `record_dim`.
    pub(crate) fn controlled_action(
        &self,
        tree: &CommunicationTree,
        label: &Label,
        record_dim: usize,
    ) -> Result<Vec<(u16, usize, Vec<CMatrix>)>> {
        let node = tree.node(label).ok_or_else(|| Error::Protocol {
            path: label.to_string(),
            reason: "node missing".into(),
        })?;
        let s = self.members.len();
        let mut out = Vec::new();
        for msg in &node.messages {
            let mut ret = 0usize;
            let mut blocks = Vec::with_capacity(s);
            for member in &self.members {
                let action = member.action(label)?;
                let branch = action
                    .branches
                    .iter()
                    .find(|b| b.symbol == msg.symbol)
                    .ok_or_else(|| Error::Protocol {
                        path: label.to_string(),
                        reason: format!("member lacks message {}", msg.symbol),
                    })?;
                ret = branch.ret_dim;
                blocks.push(&branch.kraus[0]);
            }
            let in_dim = blocks[0].ncols();
            // Ṽ: (B ⊗ S ⊗ S') → (msg ⊗ ret ⊗ S ⊗ S').
            let rows = msg.dim * ret * s * record_dim;
            let cols = in_dim * s * record_dim;
            let mut v = CMatrix::zeros(rows, cols);
            for (b_idx, block) in blocks.iter().enumerate() {
                for mm in 0..msg.dim {
                    for r in 0..ret {
                        for i in 0..in_dim {
                            let val = block[(mm * ret + r, i)];
                            if val.norm_sqr() == 0.0 {
                                continue;
                            }
                            for rec in 0..record_dim {
                                let row = ((mm * ret + r) * s + b_idx) * record_dim + rec;
                                let col = (i * s + b_idx) * record_dim + rec;
                                v[(row, col)] = val;
                            }
                        }
                    }
                }
            }
            out.push((msg.symbol, ret * s * record_dim, vec![v]));
        }
        Ok(out)
    }
}

/// Embeds a coherent Bob strategy onto the canonical schedule.
fn pad_to_schedule(tree: &CommunicationTree, strategy: &Strategy) -> Result<Strategy> {
    let schedule = tree.canonical_schedule();
    let dims = validate_strategy(tree, strategy, &schedule, true)?.dims;
    let mut actions = std::collections::BTreeMap::new();
    for (label, action) in &strategy.actions {
        let node = tree.node(label).ok_or_else(|| Error::Protocol {
            path: label.to_string(),
            reason: "action at unknown node".into(),
        })?;
        let in_actual = dims[label];
        let in_canon = schedule.bob[label];
        let mut branches = Vec::with_capacity(action.branches.len());
        let first_symbol = node.messages[0].symbol;
        for branch in &action.branches {
            let msg_dim = tree.message_dim(label, branch.symbol)?;
            let ret_canon = schedule.bob[&label.child(branch.symbol)];
            let k = &branch.kraus[0];
            let mut v = CMatrix::zeros(msg_dim * ret_canon, in_canon);
            for mm in 0..msg_dim {
                for r in 0..branch.ret_dim {
                    for i in 0..in_actual {
                        v[(mm * ret_canon + r, i)] = k[(mm * branch.ret_dim + r, i)];
                    }
            }
            }
            // Route spare canonical inputs isometrically into spare outputs
            // of the first message so Σ V†V stays the identity.
            if branch.symbol == first_symbol {
                let spare_in = in_canon - in_actual;
                let spare_out = msg_dim * ret_canon - msg_dim * branch.ret_dim;
                if spare_in > spare_out {
                    return Err(Error::Protocol {
                        path: label.to_string(),
                        reason: "cannot embed strategy onto the canonical schedule".into(),
                    });
                }
                for j in 0..spare_in {
                    // Output rows (mm = 0, r = branch.ret_dim + j).
                    v[(branch.ret_dim + j, in_actual + j)] = C64::new(1.0, 0.0);
                }
            }
            branches.push(super::strategy::MsgAction {
                symbol: branch.symbol,
                ret_dim: ret_canon,
                kraus: vec![v],
            });
        }
        actions.insert(label.clone(), super::strategy::NodeAction { branches });
    }
    Ok(Strategy { player: Owner::Bob, actions })
}

/// Commit-time (or stage-truncated) global isometries of a fully coherent
/// protocol against the strategy register: one block
/// W_x : ℓ²(S) → H_x^A ⊗ (H_x^B ⊗ ℓ²(S)) per stop node.
pub fn commit_isometries(
    tree: &CommunicationTree,
    alice: &Strategy,
    reg: &StrategyRegister,
    psi0: &CVector,
    until: super::run::Until,
) -> Result<StinespringDilation> {
    if !alice.is_coherent() {
        return Err(Error::Config("commit isometries need a coherent Alice strategy".into()));
    }
    let (d0a, d0b) = tree.root_dims();
    if psi0.len() != d0a * d0b {
        return Err(Error::Shape(format!(
            "initial vector dim {} vs root dims {}x{}",
            psi0.len(),
            d0a,
            d0b
        )));
    }
    let s = reg.len();
    // W_root = ψ0 ⊗ 1_S : rows (a, b, s).
    let mut w0 = CMatrix::zeros(d0a * d0b * s, s);
    for a in 0..d0a {
        for b in 0..d0b {
            let amp = psi0[a * d0b + b];
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            for sv in 0..s {
                w0[((a * d0b + b) * s + sv, sv)] = amp;
            }
        }
    }

    let mut blocks: Vec<DilationBlock> = Vec::new();
    // Depth-first over branches: (label, W, dim_a, dim_b incl. register).
    let mut stack = vec![(Label::root(), w0, d0a, d0b * s)];
    while let Some((label, w, dim_a, dim_b)) = stack.pop() {
        let is_stop = match until {
            super::run::Until::Commit => tree.commit_leaves().contains(&label),
            super::run::Until::Final => tree.final_leaves().contains(&label),
            super::run::Until::Depth(t) => {
                label.depth() >= t || tree.final_leaves().contains(&label)
            }
        };
        if is_stop {
            blocks.push(DilationBlock { label, dim_a, dim_b, v: w });
            continue;
        }
        let node = tree.node(&label).ok_or_else(|| Error::Protocol {
            path: label.to_string(),
            reason: "node missing".into(),
        })?;
        if node.messages.is_empty() {
            return Err(Error::Protocol {
                path: label.to_string(),
                reason: "dead end before stop".into(),
            });
        }
        match tree.owner(&label) {
            Owner::Alice => {
                let action = alice.action(&label)?;
                for branch in &action.branches {
                    let msg_dim = tree.message_dim(&label, branch.symbol)?;
                    let k = &branch.kraus[0];
                    let big = crate::numerics::kron_u(k, &crate::numerics::identity(dim_b));
                    let next = &big * &w;
                    stack.push((
                        label.child(branch.symbol),
                        next,
                        branch.ret_dim,
                        msg_dim * dim_b,
                    ));
                }
            }
            Owner::Bob => {
                for (symbol, ret_with_reg, kraus) in reg.controlled_action(tree, &label, 1)? {
                    let msg_dim = tree.message_dim(&label, symbol)?;
                    let big =
                        crate::numerics::kron_u(&crate::numerics::identity(dim_a), &kraus[0]);
                    let next = &big * &w;
                    stack.push((label.child(symbol), next, dim_a * msg_dim, ret_with_reg));
                }
            }
        }
    }
    blocks.sort_by(|a, b| a.label.cmp(&b.label));
    StinespringDilation::new(s, blocks)
}

/// The channel Γ^B(a): register states σ on ℓ²(S) to Bob's commitment-time
/// hybrid state (Schrödinger form), with Kraus operators obtained by
/// tracing the Alice factor of the commit isometries. Mixed trusted initial
/// states enter through their eigen-ensemble.
pub fn register_channel(
    tree: &CommunicationTree,
    alice: &Strategy,
    reg: &StrategyRegister,
    rho0: &crate::hybrid::HybridState,
) -> Result<Channel> {
    let coherent;
    let alice = if alice.is_coherent() {
        alice
    } else {
        coherent = super::purify::purify(tree, alice)?;
        &coherent.strategy
    };
    let root = rho0
        .branch(&Label::root())
        .ok_or_else(|| Error::Structure("initial state must sit at the root label".into()))?;
    let (vals, vecs) = hermitian_eigen(root.state.matrix());
    let mut per_label: std::collections::BTreeMap<Label, (usize, Vec<CMatrix>)> =
        std::collections::BTreeMap::new();
    for (idx, &p) in vals.iter().enumerate() {
        if p <= 1e-14 {
            continue;
        }
        let psi = vecs.column(idx).into_owned();
        let dil = commit_isometries(tree, alice, reg, &psi, super::run::Until::Commit)?;
        for block in &dil.blocks {
            let entry = per_label
                .entry(block.label.clone())
                .or_insert_with(|| (block.dim_b, Vec::new()));
            if entry.0 != block.dim_b {
                return Err(Error::Structure("inconsistent Bob dims across ensemble".into()));
            }
            // Kraus (⟨α| ⊗ 1_B̃) W_x scaled by √p.
            for alpha in 0..block.dim_a {
                let mut k = CMatrix::zeros(block.dim_b, dil.input_dim);
                for row in 0..block.dim_b {
                    for col in 0..dil.input_dim {
                        k[(row, col)] = block.v[(alpha * block.dim_b + row, col)] * p.sqrt();
                    }
                }
                entry.1.push(k);
            }
        }
    }
    let blocks = per_label
        .into_iter()
        .map(|(label, (out_dim, kraus))| ChannelBlock { label, out_dim, kraus })
        .collect();
    Channel::new(reg.len(), blocks)
}
