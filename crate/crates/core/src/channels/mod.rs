//! Quantum channels between hybrid systems.
//!
//! A [`Channel`] acts in the Schrödinger picture through per-output-label
//! Kraus sets; a single root-labeled block is an ordinary channel, several
//! labeled blocks describe an instrument whose classical outcome is a
//! message symbol path. The submodules provide Stinespring dilations, the
//! isometry alignment optimizer, channel distance estimators and the
//! special constructions used by the protocol instances.

mod align;
mod dilation;
mod distance;
mod energy;
mod special;

pub use align::{align_isometries, AlignOptions, AlignResult};
pub use dilation::{stinespring, BranchIsometry, DilationBlock, StinespringDilation};
pub use distance::{
    bystander_norm_estimate, cb_lower_choi, cb_norm_estimate, cq_norm_estimate,
    joint_fidelity_optimum, op_norm_estimate, op_norm_estimate_with_starts,
    partial_transpose_second, NormEstimate,
};
pub use energy::{
    energy_truncate, random_energy_respecting_channel, sample_constrained_state,
    truncation_deviation, EnergyConstraint, TruncatedChannel,
};
pub use special::{
    depolarizing, measure_prepare, measurement_in_basis, mu_star, random_channel,
    random_channel_shaped, randomizing_channel, RandomizingOrigin,
};

use crate::error::{Error, Result};
use crate::hybrid::{Branch, HybridState, Label};
use crate::numerics::{
    identity, kron, max_entangled, trace, CMatrix, DensityMatrix, Seed, C64, CHANNEL_TOL,
};
use std::collections::BTreeMap;

/// Structural information preserved for special constructions.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelKind {
    General,
    /// Uniform mixture of unitary conjugations; Kraus operators are U_i/√μ.
    RandomUnitary,
    /// Output is the maximally mixed state regardless of input.
    Depolarizing,
}

/// One output block of a channel: a classical label, the block's output
/// dimension and its Kraus operators (each `out_dim × input_dim`).
#[derive(Debug, Clone)]
pub struct ChannelBlock {
    pub label: Label,
    pub out_dim: usize,
    pub kraus: Vec<CMatrix>,
}

/// A completely positive trace-preserving map in the Schrödinger picture,
/// possibly with labeled (classical) output branches.
#[derive(Debug, Clone)]
pub struct Channel {
    input_dim: usize,
    blocks: Vec<ChannelBlock>,
    kind: ChannelKind,
    origin: Option<RandomizingOrigin>,
}

impl Channel {
    pub fn new(input_dim: usize, blocks: Vec<ChannelBlock>) -> Result<Self> {
        Self::with_kind(input_dim, blocks, ChannelKind::General, None)
    }

    pub(crate) fn with_kind(
        input_dim: usize,
        blocks: Vec<ChannelBlock>,
        kind: ChannelKind,
        origin: Option<RandomizingOrigin>,
    ) -> Result<Self> {
        if input_dim == 0 || blocks.is_empty() {
            return Err(Error::InvalidChannel("empty channel".into()));
        }
        let mut sum = CMatrix::zeros(input_dim, input_dim);
        for block in &blocks {
            if block.kraus.is_empty() {
                return Err(Error::InvalidChannel(format!(
                    "block [{}] has no Kraus operators",
                    block.label
                )));
            }
            for k in &block.kraus {
                if k.nrows() != block.out_dim || k.ncols() != input_dim {
                    return Err(Error::InvalidChannel(format!(
                        "Kraus operator in block [{}] is {}x{}, expected {}x{}",
                        block.label,
                        k.nrows(),
                        k.ncols(),
                        block.out_dim,
                        input_dim
                    )));
                }
                sum += k.adjoint() * k;
            }
        }
        let dev = crate::numerics::frobenius_norm(&(&sum - identity(input_dim)));
        if dev > CHANNEL_TOL * (input_dim as f64).sqrt().max(1.0) {
            return Err(Error::InvalidChannel(format!(
                "completeness violated: ‖ΣK†K − 1‖ = {:.3e}",
                dev
            )));
        }
        Ok(Channel { input_dim, blocks, kind, origin })
    }

    /// Single unlabeled block from a plain Kraus list.
    pub fn from_kraus(input_dim: usize, out_dim: usize, kraus: Vec<CMatrix>) -> Result<Self> {
        Channel::new(input_dim, vec![ChannelBlock { label: Label::root(), out_dim, kraus }])
    }

    pub fn identity(dim: usize) -> Self {
        Channel::from_kraus(dim, dim, vec![identity(dim)]).expect("identity channel")
    }

    pub fn unitary(u: &CMatrix) -> Result<Self> {
        let d = u.nrows();
        let dev = crate::numerics::frobenius_norm(&(u.adjoint() * u - identity(d)));
        if dev > CHANNEL_TOL {
            return Err(Error::InvalidChannel(format!("not unitary: dev {:.3e}", dev)));
        }
        Channel::from_kraus(d, d, vec![u.clone()])
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn blocks(&self) -> &[ChannelBlock] {
        &self.blocks
    }

    pub fn kind(&self) -> &ChannelKind {
        &self.kind
    }

    pub fn origin(&self) -> Option<&RandomizingOrigin> {
        self.origin.as_ref()
    }

    pub fn is_single_block(&self) -> bool {
        self.blocks.len() == 1 && self.blocks[0].label == Label::root()
    }

    /// Output dimension of a single-block channel.
    pub fn single_out_dim(&self) -> Result<usize> {
        if self.blocks.len() == 1 {
            Ok(self.blocks[0].out_dim)
        } else {
            Err(Error::InvalidChannel("channel has labeled output blocks".into()))
        }
    }

    /// Schrödinger action: branch m receives weight tr Σ_k KρK† and the
    /// normalized conditional state.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<HybridState> {
        if rho.dim() != self.input_dim {
            return Err(Error::Shape(format!(
                "apply: state dim {} vs channel input {}",
                rho.dim(),
                self.input_dim
            )));
        }
        let mut branches = BTreeMap::new();
        for block in &self.blocks {
            let mut out = CMatrix::zeros(block.out_dim, block.out_dim);
            for k in &block.kraus {
                out += k * rho.matrix() * k.adjoint();
            }
            let w = trace(&out).re;
            if w > crate::hybrid::PRUNE_TOL {
                branches.insert(
                    block.label.clone(),
                    Branch {
                        weight: w,
                        state: DensityMatrix::new_unchecked(out.unscale(w)),
                    },
                );
            }
        }
        Ok(HybridState::from_parts_unchecked(branches))
    }

    /// Schrödinger action of a single-block channel as a density matrix.
    pub fn apply_density(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if self.blocks.len() != 1 {
            return Err(Error::InvalidChannel(
                "apply_density requires a single output block".into(),
            ));
        }
        if rho.dim() != self.input_dim {
            return Err(Error::Shape(format!(
                "apply: state dim {} vs channel input {}",
                rho.dim(),
                self.input_dim
            )));
        }
        let block = &self.blocks[0];
        let mut out = CMatrix::zeros(block.out_dim, block.out_dim);
        for k in &block.kraus {
            out += k * rho.matrix() * k.adjoint();
        }
        Ok(DensityMatrix::new_unchecked(out))
    }

    /// Raw Schrödinger action on an arbitrary matrix, blockwise. The
    /// depolarizing kind short-circuits its d² Kraus operators.
    pub(crate) fn apply_block_raw(&self, block_idx: usize, x: &CMatrix) -> CMatrix {
        let block = &self.blocks[block_idx];
        if matches!(self.kind, ChannelKind::Depolarizing) && block_idx == 0 {
            let d = block.out_dim;
            return identity(d) * (trace(x) / C64::new(d as f64, 0.0));
        }
        let mut out = CMatrix::zeros(block.out_dim, block.out_dim);
        for k in &block.kraus {
            out += k * x * k.adjoint();
        }
        out
    }

    /// Chains `inner` then `outer` (Schrödinger order); label paths
    /// concatenate as inner-history followed by outer-history.
    pub fn compose(outer: &Channel, inner: &Channel) -> Result<Channel> {
        let mut blocks = Vec::new();
        for bi in &inner.blocks {
            if outer.input_dim != bi.out_dim {
                return Err(Error::Shape(format!(
                    "compose: inner block [{}] outputs dim {}, outer expects {}",
                    bi.label, bi.out_dim, outer.input_dim
                )));
            }
            for bo in &outer.blocks {
                let mut label = bi.label.clone();
                label.0.extend_from_slice(&bo.label.0);
                let mut kraus = Vec::with_capacity(bi.kraus.len() * bo.kraus.len());
                for ko in &bo.kraus {
                    for ki in &bi.kraus {
                        kraus.push(ko * ki);
                    }
                }
                blocks.push(ChannelBlock { label, out_dim: bo.out_dim, kraus });
            }
        }
        Channel::new(inner.input_dim, blocks)
    }

    /// Tensor product; labels concatenate left-then-right.
    pub fn tensor(left: &Channel, right: &Channel) -> Result<Channel> {
        let mut blocks = Vec::new();
        for bl in &left.blocks {
            for br in &right.blocks {
                let mut label = bl.label.clone();
                label.0.extend_from_slice(&br.label.0);
                let mut kraus = Vec::with_capacity(bl.kraus.len() * br.kraus.len());
                for kl in &bl.kraus {
                    for kr in &br.kraus {
                        kraus.push(kron(kl, kr)?);
                    }
                }
                blocks.push(ChannelBlock { label, out_dim: bl.out_dim * br.out_dim, kraus });
            }
        }
        Channel::new(left.input_dim * right.input_dim, blocks)
    }

    /// Per-label Choi blocks (c_* ⊗ id)(|Ω⟩⟨Ω|) with |Ω⟩ of the input
    /// dimension; each block is (out_dim·d) × (out_dim·d).
    pub fn choi_blocks(&self) -> Vec<(Label, CMatrix)> {
        let d = self.input_dim;
        self.blocks
            .iter()
            .map(|block| {
                let mut m = CMatrix::zeros(block.out_dim * d, block.out_dim * d);
                let scale = 1.0 / d as f64;
                for k in &block.kraus {
                    // (K ⊗ 1)|Ω⟩ has components K[i,j]/√d at index i·d + j.
                    let mut v = crate::numerics::CVector::zeros(block.out_dim * d);
                    for i in 0..block.out_dim {
                        for j in 0..d {
                            v[i * d + j] = k[(i, j)];
                        }
                    }
                    m += (&v * v.adjoint()).scale(scale);
                }
                (block.label.clone(), m)
            })
            .collect()
    }

    /// Choi matrix; labeled channels yield the block-diagonal direct sum in
    /// label order.
    pub fn choi(&self) -> CMatrix {
        let blocks = self.choi_blocks();
        if blocks.len() == 1 {
            return blocks.into_iter().next().unwrap().1;
        }
        let total: usize = blocks.iter().map(|(_, b)| b.nrows()).sum();
        let mut m = CMatrix::zeros(total, total);
        let mut off = 0;
        for (_, b) in blocks {
            let n = b.nrows();
            m.view_mut((off, off), (n, n)).copy_from(&b);
            off += n;
        }
        m
    }

    /// F_c(T) = ⟨Ω| (T ⊗ id)(|Ω⟩⟨Ω|) |Ω⟩ for square single-block channels.
    pub fn channel_fidelity(&self) -> Result<f64> {
        if self.blocks.len() != 1 || self.blocks[0].out_dim != self.input_dim {
            return Err(Error::InvalidChannel(
                "channel fidelity requires a square single-block channel".into(),
            ));
        }
        let d = self.input_dim as f64;
        let mut acc = 0.0;
        for k in &self.blocks[0].kraus {
            acc += trace(k).norm_sqr();
        }
        Ok(acc / (d * d))
    }

    /// Haar-average input-output fidelity F̄(T).
    pub fn average_fidelity(&self, mode: AverageFidelityMode) -> Result<AverageFidelity> {
        match mode {
            AverageFidelityMode::Exact => {
                let d = self.input_dim as f64;
                let fc = self.channel_fidelity()?;
                Ok(AverageFidelity { value: (d * fc + 1.0) / (d + 1.0), stderr: None })
            }
            AverageFidelityMode::MonteCarlo { samples, seed } => {
                if samples < 2 {
                    return Err(Error::Config("Monte Carlo mode needs at least 2 samples".into()));
                }
                if self.blocks.len() != 1 || self.blocks[0].out_dim != self.input_dim {
                    return Err(Error::InvalidChannel(
                        "average fidelity requires a square single-block channel".into(),
                    ));
                }
                let mut sum = 0.0f64;
                let mut sumsq = 0.0f64;
                for i in 0..samples {
                    let psi = crate::numerics::haar_state(self.input_dim, seed.child(i as u64));
                    let rho = &psi * psi.adjoint();
                    let out = self.apply_block_raw(0, &rho);
                    let f = (psi.adjoint() * &out * &psi)[(0, 0)].re;
                    sum += f;
                    sumsq += f * f;
                }
                let n = samples as f64;
                let mean = sum / n;
                let var = (sumsq / n - mean * mean).max(0.0);
                Ok(AverageFidelity { value: mean, stderr: Some((var / n).sqrt()) })
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum AverageFidelityMode {
    Exact,
    MonteCarlo { samples: usize, seed: Seed },
}

#[derive(Debug, Clone, Copy)]
pub struct AverageFidelity {
    pub value: f64,
    pub stderr: Option<f64>,
}

/// Exact Haar average ∫⟨ψ|M(|ψ⟩⟨ψ|)|ψ⟩ dψ of a completely positive map
/// given by Kraus operators (not necessarily trace-preserving):
/// [Σ_k |tr K_k|² + tr Σ_k K_k†K_k] / (d(d+1)).
pub fn haar_average_fidelity_cp(kraus: &[CMatrix], dim: usize) -> f64 {
    let mut t = 0.0f64;
    let mut s = 0.0f64;
    for k in kraus {
        t += trace(k).norm_sqr();
        s += trace(&(k.adjoint() * k)).re;
    }
    let d = dim as f64;
    (t + s) / (d * (d + 1.0))
}

/// The maximally entangled probe state of the channel's input dimension.
pub fn probe_state(dim: usize) -> DensityMatrix {
    DensityMatrix::pure(&max_entangled(dim)).expect("probe state")
}

pub(crate) fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[cfg(test)]
mod tests;
