//! Forward execution of a protocol: branchwise simulation over the
//! communication tree, either with a plain Bob strategy or with Bob's
//! choices driven by a strategy register.

use super::register::StrategyRegister;
use super::strategy::Strategy;
use super::tree::{CommunicationTree, Owner};
use crate::error::{Error, Result};
use crate::hybrid::{Branch, HybridState, Label, PRUNE_TOL};
use crate::numerics::{kron_u, trace, CMatrix, DensityMatrix};
use std::collections::BTreeMap;

/// Largest number of simultaneously live classical branches.
pub const BRANCH_CAP: usize = 10_000;

/// Where to stop the forward simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Until {
    Commit,
    Final,
    Depth(usize),
}

/// Result of a run: the hybrid state over the stop nodes together with the
/// per-label (Alice, Bob) dimension splits of each branch.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: HybridState,
    pub splits: BTreeMap<Label, (usize, usize)>,
}

impl RunOutput {
    pub fn restrict(&self, side: crate::hybrid::Side) -> Result<HybridState> {
        crate::hybrid::restrict(&self.state, &self.splits, side)
    }
}

struct Frontier {
    label: Label,
    weight: f64,
    state: CMatrix,
    dim_a: usize,
    dim_b: usize,
}

fn stop_here(tree: &CommunicationTree, label: &Label, until: Until) -> bool {
    match until {
        Until::Commit => tree.commit_leaves().contains(label),
        Until::Final => tree.final_leaves().contains(label),
        Until::Depth(t) => label.depth() >= t || tree.final_leaves().contains(label),
    }
}

/// Runs the protocol with plain strategies for both parties.
pub fn run(
    tree: &CommunicationTree,
    alice: &Strategy,
    bob: &Strategy,
    rho0: &HybridState,
    until: Until,
) -> Result<RunOutput> {
    let actions = |label: &Label, owner: Owner| -> Result<Vec<(u16, usize, Vec<CMatrix>)>> {
        let strategy = match owner {
            Owner::Alice => alice,
            Owner::Bob => bob,
        };
        let action = strategy.action(label)?;
        Ok(action
            .branches
            .iter()
            .map(|b| (b.symbol, b.ret_dim, b.kraus.clone()))
            .collect())
    };
    run_generic(tree, rho0, 1, until, &actions)
}

/// Runs the protocol with Bob's strategy register: his lab carries the
/// register factor ℓ²(S) (times an inert record factor when σ lives on
/// ℓ²(S) ⊗ ℓ²(S')), and his moves are the controlled steps
/// Σ_b V(b) ⊗ |b⟩⟨b|.
pub fn run_register(
    tree: &CommunicationTree,
    alice: &Strategy,
    reg: &StrategyRegister,
    sigma: &CMatrix,
    rho0: &HybridState,
    until: Until,
) -> Result<RunOutput> {
    let s_dim = reg.len();
    if sigma.nrows() % s_dim != 0 || sigma.nrows() != sigma.ncols() {
        return Err(Error::Shape(format!(
            "register state is {}x{}, not a multiple of |S| = {}",
            sigma.nrows(),
            sigma.ncols(),
            s_dim
        )));
    }
    let record_dim = sigma.nrows() / s_dim;
    let tr = trace(sigma).re;
    if (tr - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDensity(format!("register state trace {}", tr)));
    }

    // Initial joint state ρ0 ⊗ σ with Bob's factors ordered B ⊗ S ⊗ S'.
    let root_branch = rho0.branch(&Label::root()).ok_or_else(|| {
        Error::Structure("initial state must sit at the root label".into())
    })?;
    let (d0a, d0b) = tree.root_dims();
    if root_branch.state.dim() != d0a * d0b {
        return Err(Error::Shape(format!(
            "initial state dim {} vs root dims {}x{}",
            root_branch.state.dim(),
            d0a,
            d0b
        )));
    }
    let joint = kron_u(root_branch.state.matrix(), sigma);
    let init = HybridState::single(DensityMatrix::new_unchecked(joint));

    let actions = |label: &Label, owner: Owner| -> Result<Vec<(u16, usize, Vec<CMatrix>)>> {
        match owner {
            Owner::Alice => {
                let action = alice.action(label)?;
                Ok(action
                    .branches
                    .iter()
                    .map(|b| (b.symbol, b.ret_dim, b.kraus.clone()))
                    .collect())
            }
            Owner::Bob => reg.controlled_action(tree, label, record_dim),
        }
    };
    run_generic(tree, &init, s_dim * record_dim, until, &actions)
}

/// Core branchwise simulation. `bob_extra` is the register (and record)
/// dimension folded into Bob's lab, 1 for plain runs. The action callback
/// returns (symbol, retained dim, Kraus list) triples whose retained dims
/// are the literal Kraus output factors, register included.
fn run_generic(
    tree: &CommunicationTree,
    rho0: &HybridState,
    bob_extra: usize,
    until: Until,
    actions: &dyn Fn(&Label, Owner) -> Result<Vec<(u16, usize, Vec<CMatrix>)>>,
) -> Result<RunOutput> {
    let (d0a, d0b) = tree.root_dims();
    let root_branch = rho0
        .branch(&Label::root())
        .ok_or_else(|| Error::Structure("initial state must sit at the root label".into()))?;
    if root_branch.state.dim() != d0a * d0b * bob_extra {
        return Err(Error::Shape(format!(
            "initial state dim {} vs {}x{} (+register {})",
            root_branch.state.dim(),
            d0a,
            d0b,
            bob_extra
        )));
    }

    let mut frontier = vec![Frontier {
        label: Label::root(),
        weight: 1.0,
        state: root_branch.state.matrix().clone(),
        dim_a: d0a,
        dim_b: d0b * bob_extra,
    }];
    let mut done: Vec<Frontier> = Vec::new();

    while let Some(front) = frontier.pop() {
        if stop_here(tree, &front.label, until) {
            done.push(front);
            continue;
        }
        let node = tree.node(&front.label).ok_or_else(|| Error::Protocol {
            path: front.label.to_string(),
            reason: "node missing".into(),
        })?;
        if node.messages.is_empty() {
            return Err(Error::Protocol {
                path: front.label.to_string(),
                reason: "reached a dead end before the stop condition".into(),
            });
        }
        let owner = tree.owner(&front.label);
        let branch_actions = actions(&front.label, owner)?;
        for (symbol, ret_dim, kraus) in branch_actions {
            let msg_dim = tree.message_dim(&front.label, symbol)?;
            let (new_dim_a, new_dim_b, out_dim) = match owner {
                // Kraus: A → ret ⊗ msg; global output ret ⊗ (msg ⊗ B).
                Owner::Alice => (ret_dim, msg_dim * front.dim_b, ret_dim * msg_dim * front.dim_b),
                // Kraus: B(+reg) → msg ⊗ ret(+reg); global output (A ⊗ msg) ⊗ ret.
                Owner::Bob => (front.dim_a * msg_dim, ret_dim, front.dim_a * msg_dim * ret_dim),
            };
            let mut out = CMatrix::zeros(out_dim, out_dim);
            for k in &kraus {
                let global = match owner {
                    Owner::Alice => kron_u(k, &crate::numerics::identity(front.dim_b)),
                    Owner::Bob => kron_u(&crate::numerics::identity(front.dim_a), k),
                };
                out += &global * &front.state * global.adjoint();
            }
            let w = trace(&out).re;
            if w * front.weight <= PRUNE_TOL {
                continue;
            }
            frontier.push(Frontier {
                label: front.label.child(symbol),
                weight: front.weight * w,
                state: out.unscale(w),
                dim_a: new_dim_a,
                dim_b: new_dim_b,
            });
        }
        if frontier.len() + done.len() > BRANCH_CAP {
            return Err(Error::BranchExplosion {
                count: frontier.len() + done.len(),
                cap: BRANCH_CAP,
            });
        }
    }

    let mut branches = BTreeMap::new();
    let mut splits = BTreeMap::new();
    for f in done {
        splits.insert(f.label.clone(), (f.dim_a, f.dim_b));
        branches.insert(
            f.label,
            Branch { weight: f.weight, state: DensityMatrix::new_unchecked(f.state) },
        );
    }
    Ok(RunOutput { state: HybridState::from_parts_unchecked(branches), splits })
}
