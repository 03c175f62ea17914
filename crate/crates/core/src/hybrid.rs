//! Direct-sum hybrid classical-quantum states and operators.
//!
//! A hybrid state assigns to each classical message history (a [`Label`]) a
//! weight and a normalized density matrix; the pair represents one summand
//! of a direct-sum state. Weights and normalized branch states are stored
//! factored, so vanishing-weight branches carry no numerical debris and are
//! dropped.

use crate::error::{Error, Result};
use crate::numerics::{partial_trace, trace, trace_norm, CMatrix, DensityMatrix, C64};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Tolerance on the total weight of a hybrid state.
pub const WEIGHT_TOL: f64 = 1e-9;

/// Branches below this weight are pruned as numerically degenerate.
pub const PRUNE_TOL: f64 = 1e-15;

/// A classical message history m₁m₂…m_N; the root history is empty.
///
/// Labels are message-symbol paths rather than opaque identifiers, so the
/// accumulated classical information is structural.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(pub Vec<u16>);

impl Label {
    pub fn root() -> Self {
        Label(Vec::new())
    }

    pub fn child(&self, symbol: u16) -> Label {
        let mut v = self.0.clone();
        v.push(symbol);
        Label(v)
    }

    pub fn parent(&self) -> Option<(Label, u16)> {
        let mut v = self.0.clone();
        v.pop().map(|m| (Label(v), m))
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn is_prefix_of(&self, other: &Label) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            write!(f, "ε")
        } else {
            let parts: Vec<String> = self.0.iter().map(|m| m.to_string()).collect();
            write!(f, "{}", parts.join("."))
        }
    }
}

/// One direct summand: weight and normalized state.
#[derive(Debug, Clone)]
pub struct Branch {
    pub weight: f64,
    pub state: DensityMatrix,
}

/// State of a hybrid classical-quantum system: ⊕ₓ pₓ ρₓ.
#[derive(Debug, Clone, Default)]
pub struct HybridState {
    branches: BTreeMap<Label, Branch>,
}

impl HybridState {
    /// Builds a hybrid state, dropping zero-weight branches and checking
    /// normalization within [`WEIGHT_TOL`].
    pub fn new(branches: BTreeMap<Label, Branch>) -> Result<Self> {
        let mut kept = BTreeMap::new();
        let mut total = 0.0f64;
        for (label, branch) in branches {
            if branch.weight < -WEIGHT_TOL {
                return Err(Error::Structure(format!(
                    "negative weight {} at [{}]",
                    branch.weight, label
                )));
            }
            total += branch.weight;
            if branch.weight > PRUNE_TOL {
                kept.insert(label, branch);
            }
        }
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::Structure(format!("total weight {}", total)));
        }
        Ok(HybridState { branches: kept })
    }

    pub fn single(state: DensityMatrix) -> Self {
        Self::single_at(Label::root(), state)
    }

    pub fn single_at(label: Label, state: DensityMatrix) -> Self {
        let mut branches = BTreeMap::new();
        branches.insert(label, Branch { weight: 1.0, state });
        HybridState { branches }
    }

    /// Internal constructor for engine outputs that are normalized by
    /// construction; still prunes degenerate branches.
    pub(crate) fn from_parts_unchecked(branches: BTreeMap<Label, Branch>) -> Self {
        let kept = branches
            .into_iter()
            .filter(|(_, b)| b.weight > PRUNE_TOL)
            .collect();
        HybridState { branches: kept }
    }

    pub fn branches(&self) -> &BTreeMap<Label, Branch> {
        &self.branches
    }

    pub fn labels(&self) -> impl Iterator<Item = &Label> {
        self.branches.keys()
    }

    pub fn total_weight(&self) -> f64 {
        self.branches.values().map(|b| b.weight).sum()
    }

    pub fn weight(&self, label: &Label) -> f64 {
        self.branches.get(label).map_or(0.0, |b| b.weight)
    }

    pub fn branch(&self, label: &Label) -> Option<&Branch> {
        self.branches.get(label)
    }
}

/// Block operator ⊕ₓ Aₓ on a hybrid system.
#[derive(Debug, Clone)]
pub struct HybridOperator {
    pub blocks: BTreeMap<Label, CMatrix>,
}

impl HybridOperator {
    pub fn new(blocks: BTreeMap<Label, CMatrix>) -> Self {
        HybridOperator { blocks }
    }
}

/// Σₓ pₓ tr(ρₓ Aₓ): expectation of a block operator in a hybrid state.
pub fn hybrid_expectation(state: &HybridState, op: &HybridOperator) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for (label, branch) in state.branches() {
        let block = op.blocks.get(label).ok_or_else(|| {
            Error::Structure(format!("operator has no block for label [{}]", label))
        })?;
        if block.nrows() != branch.state.dim() || block.ncols() != branch.state.dim() {
            return Err(Error::Structure(format!(
                "block at [{}] is {}x{}, state dim {}",
                label,
                block.nrows(),
                block.ncols(),
                branch.state.dim()
            )));
        }
        acc += trace(&(branch.state.matrix() * block)) * branch.weight;
    }
    Ok(acc)
}

/// Σₓ ‖pₓρₓ − qₓσₓ‖₁ over the union of the label sets; missing labels count
/// with weight zero. Equals twice the best distinguishing-probability gap.
pub fn hybrid_trace_distance(s: &HybridState, t: &HybridState) -> f64 {
    let labels: BTreeSet<&Label> = s.labels().chain(t.labels()).collect();
    let mut acc = 0.0f64;
    for label in labels {
        match (s.branch(label), t.branch(label)) {
            (Some(a), Some(b)) if a.state.dim() == b.state.dim() => {
                let diff = a.state.matrix().scale(a.weight) - b.state.matrix().scale(b.weight);
                acc += trace_norm(&diff);
            }
            // Branches on different spaces are perfectly distinguishable.
            (Some(a), Some(b)) => acc += a.weight + b.weight,
            (Some(a), None) => acc += a.weight,
            (None, Some(b)) => acc += b.weight,
            (None, None) => unreachable!(),
        }
    }
    acc
}

/// Which party's factor to keep when restricting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Alice,
    Bob,
}

/// Branchwise partial trace: every branch dimension must factor as
/// dim_A(x)·dim_B(x) per the supplied split map; weights are unchanged.
pub fn restrict(
    state: &HybridState,
    splits: &BTreeMap<Label, (usize, usize)>,
    keep: Side,
) -> Result<HybridState> {
    let mut out = BTreeMap::new();
    for (label, branch) in state.branches() {
        let &(da, db) = splits
            .get(label)
            .ok_or_else(|| Error::Structure(format!("no dimension split for label [{}]", label)))?;
        if da * db != branch.state.dim() {
            return Err(Error::Structure(format!(
                "split {}x{} does not match dim {} at [{}]",
                da,
                db,
                branch.state.dim(),
                label
            )));
        }
        let kept = match keep {
            Side::Alice => [0usize],
            Side::Bob => [1usize],
        };
        let red = partial_trace(branch.state.matrix(), &[da, db], &kept)?;
        out.insert(
            label.clone(),
            Branch {
                weight: branch.weight,
                state: DensityMatrix::new_unchecked(red),
            },
        );
    }
    Ok(HybridState::from_parts_unchecked(out))
}
