//! Concealment measurement and the constructive cheat: purify, align the
//! commitment-time dilations blockwise, rotate with the aligning unitaries,
//! and revert into the other honest strategy.

use super::purify::{purify, PurifiedStrategy};
use super::register::{commit_isometries, register_channel, StrategyRegister};
use super::run::{run_register, RunOutput, Until};
use super::strategy::{MsgAction, NodeAction, Strategy};
use super::tree::{CommunicationTree, Owner};
use crate::channels::{align_isometries, cb_lower_choi, AlignOptions, AlignResult};
use crate::error::{Error, Result};
use crate::hybrid::{hybrid_trace_distance, HybridState, Label, Side};
use crate::numerics::{
    hermitian_eigen, identity, kron_u, trace, CMatrix, CVector, C64,
};
use std::collections::BTreeMap;

/// Concealment bounds in the cb-norm convention, together with the
/// trace-norm quantity of the plain concealment definition.
#[derive(Debug, Clone)]
pub struct ConcealmentReport {
    /// Choi-probe lower bound on ‖Γ^B(a₀) − Γ^B(a₁)‖_cb (entangled record).
    pub eps_lower: f64,
    /// 2 · alignment value: upper bound on the cb-norm distance.
    pub eps_upper: f64,
    /// max_b ½‖ρ^B_c(a₀,b) − ρ^B_c(a₁,b)‖₁ over the register members.
    pub eps_trace: f64,
    pub align: AlignResult,
}

/// A synthesized cheat: the purified commitment play shared by both bit
/// values, the per-history rotation ⊕ₓ Uₓ, and the reverts into either
/// honest strategy.
#[derive(Debug, Clone)]
pub struct CheatPlan {
    pub purified0: PurifiedStrategy,
    pub purified1: PurifiedStrategy,
    pub unitaries: BTreeMap<Label, CMatrix>,
    pub padded_dims: BTreeMap<Label, usize>,
    pub alignment_value: f64,
    pub alignment_lower: f64,
    pub converged: bool,
}

/// Per-leaf verification POVM on Bob's final lab (register included):
/// effects for accepting the opening as bit 0 resp. bit 1; the remainder
/// is the not-ok outcome.
#[derive(Debug, Clone)]
pub struct Verifier {
    pub povms: BTreeMap<Label, [CMatrix; 2]>,
}

impl Verifier {
    /// Acceptance probability of the claimed bit on a final hybrid state
    /// restricted to Bob. An inert record factor of dimension `record_dim`
    /// may trail Bob's lab.
    pub fn acceptance(
        &self,
        finals: &RunOutput,
        bit: u8,
        record_dim: usize,
    ) -> Result<f64> {
        let bob = finals.restrict(Side::Bob)?;
        let mut acc = 0.0f64;
        for (label, branch) in bob.branches() {
            let povm = self.povms.get(label).ok_or_else(|| Error::Protocol {
                path: label.to_string(),
                reason: "no verifier POVM at final leaf".into(),
            })?;
            let effect = &povm[bit as usize];
            let expected = effect.nrows() * record_dim;
            if branch.state.dim() != expected {
                return Err(Error::Shape(format!(
                    "verifier effect dim {} (record {}) vs state dim {} at [{}]",
                    effect.nrows(),
                    record_dim,
                    branch.state.dim(),
                    label
                )));
            }
            let big = if record_dim == 1 {
                effect.clone()
            } else {
                kron_u(effect, &identity(record_dim))
            };
            acc += branch.weight * trace(&(branch.state.matrix() * &big)).re;
        }
        Ok(acc)
    }
}

/// Security evaluation of a cheat plan.
#[derive(Debug, Clone)]
pub struct SecurityReport {
    pub eps_lower: f64,
    pub eps_upper: f64,
    pub eps_trace: f64,
    /// Half the worst trace distance between cheat and honest finals on
    /// Bob's side, over register basis states and the entangled record.
    pub delta_hat: f64,
    /// Soundness failure: 1 − min acceptance of honest play.
    pub eta: f64,
    pub alignment_value: f64,
    pub alignment_lower: f64,
    pub converged: bool,
    pub rows: Vec<StrategyRow>,
}

#[derive(Debug, Clone)]
pub struct StrategyRow {
    /// Register member index, or None for the entangled-record run.
    pub bob: Option<usize>,
    pub bit: u8,
    pub trace_gap: f64,
    pub accept_honest: f64,
    pub accept_cheat: f64,
}

fn pure_root_vector(rho0: &HybridState) -> Result<CVector> {
    let root = rho0
        .branch(&Label::root())
        .ok_or_else(|| Error::Structure("initial state must sit at the root label".into()))?;
    let (vals, vecs) = hermitian_eigen(root.state.matrix());
    let mut top = 0usize;
    for (i, v) in vals.iter().enumerate() {
        if *v > vals[top] {
            top = i;
        }
    }
    if vals[top] < 1.0 - 1e-9 {
        return Err(Error::Domain(
            "cheat synthesis requires a pure trusted initial state".into(),
        ));
    }
    Ok(vecs.column(top).into_owned())
}

/// Concealment bounds: the Choi probe of the register channels from below,
/// twice the blockwise alignment value from above.
pub fn concealment(
    tree: &CommunicationTree,
    a0: &Strategy,
    a1: &Strategy,
    reg: &StrategyRegister,
    rho0: &HybridState,
    opts: &AlignOptions,
) -> Result<ConcealmentReport> {
    let gamma0 = register_channel(tree, a0, reg, rho0)?;
    let gamma1 = register_channel(tree, a1, reg, rho0)?;
    let eps_lower = cb_lower_choi(&gamma0, &gamma1)?;

    let psi0 = pure_root_vector(rho0)?;
    let p0 = purify(tree, a0)?;
    let p1 = purify(tree, a1)?;
    let w0 = commit_isometries(tree, &p0.strategy, reg, &psi0, Until::Commit)?;
    let w1 = commit_isometries(tree, &p1.strategy, reg, &psi0, Until::Commit)?;
    let align = align_isometries(&w0, &w1, true, opts)?;

    let mut eps_trace = 0.0f64;
    for b in 0..reg.len() {
        let sigma = basis_state(reg.len(), b);
        let out0 = run_register(tree, a0, reg, &sigma, rho0, Until::Commit)?;
        let out1 = run_register(tree, a1, reg, &sigma, rho0, Until::Commit)?;
        let d = hybrid_trace_distance(&out0.restrict(Side::Bob)?, &out1.restrict(Side::Bob)?);
        eps_trace = eps_trace.max(0.5 * d);
    }

    Ok(ConcealmentReport { eps_lower, eps_upper: 2.0 * align.value, eps_trace, align })
}

/// Choi-probe concealment bound with the protocol truncated at a given
/// depth; used to check that intermediate leakage never exceeds the
/// commitment-time leakage.
pub fn concealment_lower_at_depth(
    tree: &CommunicationTree,
    a0: &Strategy,
    a1: &Strategy,
    reg: &StrategyRegister,
    rho0: &HybridState,
    depth: usize,
) -> Result<f64> {
    let psi0 = pure_root_vector(rho0)?;
    let p0 = purify(tree, a0)?;
    let p1 = purify(tree, a1)?;
    let mut dist = 0.0f64;
    let w0 = commit_isometries(tree, &p0.strategy, reg, &psi0, Until::Depth(depth))?;
    let w1 = commit_isometries(tree, &p1.strategy, reg, &psi0, Until::Depth(depth))?;
    // Entangled-record state per branch: tr_A (W_x ⊗ 1_S') Ω (W_x ⊗ 1_S')†,
    // evaluated through the restriction channels' Choi blocks.
    let g0 = w0.restriction_channel()?;
    let g1 = w1.restriction_channel()?;
    let b0 = g0.choi_blocks();
    let b1 = g1.choi_blocks();
    for ((l0, c0), (l1, c1)) in b0.iter().zip(b1.iter()) {
        if l0 != l1 {
            return Err(Error::Structure("stage blocks differ".into()));
        }
        dist += crate::numerics::trace_norm(&(c0 - c1));
    }
    Ok(dist)
}

/// Builds the cheat: purify both honest strategies, align the commit-time
/// dilations blockwise, keep the unitaries and reverts.
pub fn synthesize_cheat(
    tree: &CommunicationTree,
    a0: &Strategy,
    a1: &Strategy,
    reg: &StrategyRegister,
    rho0: &HybridState,
    opts: &AlignOptions,
) -> Result<CheatPlan> {
    let psi0 = pure_root_vector(rho0)?;
    let p0 = purify(tree, a0)?;
    let p1 = purify(tree, a1)?;
    let w0 = commit_isometries(tree, &p0.strategy, reg, &psi0, Until::Commit)?;
    let w1 = commit_isometries(tree, &p1.strategy, reg, &psi0, Until::Commit)?;
    let align = align_isometries(&w0, &w1, true, opts)?;
    Ok(CheatPlan {
        purified0: p0,
        purified1: p1,
        unitaries: align.unitaries.iter().cloned().collect(),
        padded_dims: align.padded_dims.iter().cloned().collect(),
        alignment_value: align.value,
        alignment_lower: align.lower_bound,
        converged: align.converged,
    })
}

fn basis_state(dim: usize, idx: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(idx, idx)] = C64::new(1.0, 0.0);
    m
}

fn record_probe(dim: usize) -> CMatrix {
    let omega = crate::numerics::max_entangled(dim);
    &omega * omega.adjoint()
}

/// The commitment leaf on the path to a label, if any.
fn commit_ancestor(tree: &CommunicationTree, label: &Label) -> Option<Label> {
    tree.commit_leaves().iter().find(|c| c.is_prefix_of(label)).cloned()
}

/// Alice's executable cheat strategy for announcing `bit`: play the
/// purification of a₀ through the commitment phase; at her first move after
/// the commitment leaf apply (for bit 1) the aligning unitary, then the
/// revert into the honest strategy for `bit`, then its honest opening.
pub fn cheat_strategy(
    tree: &CommunicationTree,
    plan: &CheatPlan,
    honest: &Strategy,
    bit: u8,
) -> Result<Strategy> {
    let purified_target = if bit == 0 { &plan.purified0 } else { &plan.purified1 };
    let mut actions: BTreeMap<Label, NodeAction> = BTreeMap::new();
    for (label, node) in tree.nodes() {
        if node.messages.is_empty() || tree.owner(label) != Owner::Alice {
            continue;
        }
        match commit_ancestor(tree, label) {
            None => {
                // Commitment phase: the purified a₀ play (shared by both bit
                // values).
                actions.insert(label.clone(), plan.purified0.strategy.action(label)?.clone());
            }
            Some(commit_leaf) => {
                // First Alice move strictly below the commitment leaf whose
                // Alice-ancestors are all at or above it: fold in the cheat
                // rotation and revert. Later moves: honest openings.
                let first_alice_move = {
                    let mut is_first = true;
                    let mut cursor = label.clone();
                    while let Some((parent, _)) = cursor.parent() {
                        if parent == commit_leaf || parent.depth() < commit_leaf.depth() {
                            break;
                        }
                        if tree.owner(&parent) == Owner::Alice
                            && tree.node(&parent).map_or(false, |n| !n.messages.is_empty())
                        {
                            is_first = false;
                            break;
                        }
                        cursor = parent;
                    }
                    is_first
                };
                if first_alice_move {
                    actions.insert(
                        label.clone(),
                        cheat_opening_action(tree, plan, honest, purified_target, bit, label)?,
                    );
                } else {
                    actions.insert(label.clone(), honest.action(label)?.clone());
                }
            }
        }
    }
    Ok(Strategy { player: Owner::Alice, actions })
}

/// The composite opening action at Alice's first post-commitment move:
/// honest opening Kraus ∘ revert ∘ (U ⊕ completion) ∘ embedding.
fn cheat_opening_action(
    tree: &CommunicationTree,
    plan: &CheatPlan,
    honest: &Strategy,
    purified_target: &PurifiedStrategy,
    bit: u8,
    label: &Label,
) -> Result<NodeAction> {
    let commit_leaf = commit_ancestor(tree, label)
        .or_else(|| tree.commit_leaves().get(label).cloned())
        .ok_or_else(|| Error::Protocol {
            path: label.to_string(),
            reason: "opening action outside the opening phase".into(),
        })?;
    // Message factors Alice received between the commitment leaf and here.
    let mut msg_dims = 1usize;
    {
        let mut cursor = label.clone();
        while cursor != commit_leaf {
            let (parent, symbol) = cursor.parent().expect("below commit leaf");
            if tree.owner(&parent) == Owner::Bob {
                msg_dims *= tree.message_dim(&parent, symbol)?;
            }
            cursor = parent;
        }
    }
    let pad = *plan.padded_dims.get(&commit_leaf).ok_or_else(|| Error::Protocol {
        path: commit_leaf.to_string(),
        reason: "no aligning unitary at this commitment leaf".into(),
    })?;
    let u = if bit == 1 {
        plan.unitaries[&commit_leaf].clone()
    } else {
        identity(pad)
    };

    // Embedding of the purified-a₀ lab at the commitment leaf into the
    // padded alignment space, extended by the received message factors.
    let p0_dim = plan.purified0.lab_dim(&commit_leaf);
    let pt_dim = purified_target.lab_dim(&commit_leaf);
    if p0_dim > pad || pt_dim > pad {
        return Err(Error::Shape("alignment padding smaller than purified labs".into()));
    }
    // Map: purified0-lab ⊗ msgs → padded ⊗ msgs, rotate, compress onto the
    // purified-target lab, revert (trace ancillas), run the honest opening.
    let revert = purified_target.revert_kraus(label)?;
    let honest_action = honest.action(label)?;

    // U acts on the commitment-leaf lab; received messages ride along.
    let mut u_embed = CMatrix::zeros(pt_dim * msg_dims, p0_dim * msg_dims);
    {
        // (J_target† U J_0) ⊗ 1_msgs with J's the leading-coordinate
        // embeddings into the padded space.
        let mut core = CMatrix::zeros(pt_dim, p0_dim);
        for r in 0..pt_dim {
            for c in 0..p0_dim {
                core[(r, c)] = u[(r, c)];
            }
        }
        for r in 0..pt_dim {
            for c in 0..p0_dim {
                let val = core[(r, c)];
                if val.norm_sqr() == 0.0 {
                    continue;
                }
                for m in 0..msg_dims {
                    u_embed[(r * msg_dims + m, c * msg_dims + m)] = val;
                }
            }
        }
    }
    // Completion of the compression J_target† (trace-nonincreasing part):
    // mass rotated outside the target lab is rerouted to the target ground
    // state so the composite stays trace preserving.
    let mut completion: Vec<CMatrix> = Vec::new();
    {
        // (1 − J_t J_t†) U J_0 has rows pad, columns p0; nonzero rows ≥ pt.
        let rows = pad - pt_dim;
        if rows > 0 {
            for r in 0..rows {
                let mut k = CMatrix::zeros(pt_dim * msg_dims, p0_dim * msg_dims);
                let mut nonzero = false;
                for c in 0..p0_dim {
                    let val = u[(pt_dim + r, c)];
                    if val.norm_sqr() == 0.0 {
                        continue;
                    }
                    nonzero = true;
                    for m in 0..msg_dims {
                        // Reroute to the ground state of the target lab.
                        k[(m, c * msg_dims + m)] = val;
                    }
                }
                if nonzero {
                    completion.push(k);
                }
            }
        }
    }

    // revert ⊗ 1_msgs, honest opening on (honest lab ⊗ msgs).
    let honest_in = purified_target.honest_dim(label);
    let mut branches = Vec::with_capacity(honest_action.branches.len());
    for hb in &honest_action.branches {
        let mut kraus = Vec::new();
        for hk in &hb.kraus {
            if hk.ncols() != honest_in {
                return Err(Error::Shape(format!(
                    "honest opening Kraus expects dim {}, lab is {}",
                    hk.ncols(),
                    honest_in
                )));
            }
            for rv in &revert {
                let r_big = extend_revert(rv, msg_dims, purified_target, label)?;
                for pre in std::iter::once(&u_embed).chain(completion.iter()) {
                    kraus.push(hk * &r_big * pre);
                }
            }
        }
        branches.push(MsgAction { symbol: hb.symbol, ret_dim: hb.ret_dim, kraus });
    }
    Ok(NodeAction { branches })
}

/// The revert at `label` acts on the purified lab whose layout already
/// includes the messages received since the commitment leaf; the engine's
/// state carries them at the end (Alice appends), so the revert Kraus
/// applies as-is when layouts line up. This helper checks the bookkeeping.
fn extend_revert(
    rv: &CMatrix,
    msg_dims: usize,
    purified_target: &PurifiedStrategy,
    label: &Label,
) -> Result<CMatrix> {
    let expected_cols = purified_target.lab_dim(label);
    if rv.ncols() != expected_cols {
        return Err(Error::Shape(format!(
            "revert Kraus is {}x{}, lab dim {}",
            rv.nrows(),
            rv.ncols(),
            expected_cols
        )));
    }
    let _ = msg_dims;
    Ok(rv.clone())
}

/// Runs the plan against every register member and the entangled record.
pub fn evaluate_cheat(
    tree: &CommunicationTree,
    plan: &CheatPlan,
    a0: &Strategy,
    a1: &Strategy,
    reg: &StrategyRegister,
    rho0: &HybridState,
    verifier: &Verifier,
    concealment_report: Option<&ConcealmentReport>,
) -> Result<SecurityReport> {
    let s = reg.len();
    let mut rows = Vec::new();
    let mut delta_hat = 0.0f64;
    let mut eta: f64 = 0.0;

    let mut contexts: Vec<(Option<usize>, CMatrix, usize)> =
        (0..s).map(|b| (Some(b), basis_state(s, b), 1usize)).collect();
    contexts.push((None, record_probe(s), s));

    for (bob_idx, sigma, record_dim) in &contexts {
        for bit in [0u8, 1u8] {
            let honest = if bit == 0 { a0 } else { a1 };
            let cheat = cheat_strategy(tree, plan, honest, bit)?;
            let honest_out = run_register(tree, honest, reg, sigma, rho0, Until::Final)?;
            let cheat_out = run_register(tree, &cheat, reg, sigma, rho0, Until::Final)?;
            let gap = 0.5
                * hybrid_trace_distance(
                    &honest_out.restrict(Side::Bob)?,
                    &cheat_out.restrict(Side::Bob)?,
                );
            delta_hat = delta_hat.max(gap);
            let acc_honest = verifier.acceptance(&honest_out, bit, *record_dim)?;
            let acc_cheat = verifier.acceptance(&cheat_out, bit, *record_dim)?;
            if bob_idx.is_some() {
                eta = eta.max(1.0 - acc_honest);
            }
            rows.push(StrategyRow {
                bob: *bob_idx,
                bit,
                trace_gap: gap,
                accept_honest: acc_honest,
                accept_cheat: acc_cheat,
            });
        }
    }

    let (eps_lower, eps_upper, eps_trace) = match concealment_report {
        Some(c) => (c.eps_lower, c.eps_upper, c.eps_trace),
        None => {
            let c = concealment(tree, a0, a1, reg, rho0, &AlignOptions::default())?;
            (c.eps_lower, c.eps_upper, c.eps_trace)
        }
    };

    Ok(SecurityReport {
        eps_lower,
        eps_upper,
        eps_trace,
        delta_hat,
        eta,
        alignment_value: plan.alignment_value,
        alignment_lower: plan.alignment_lower,
        converged: plan.converged,
        rows,
    })
}
