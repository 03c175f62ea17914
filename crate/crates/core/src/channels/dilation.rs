//! Stinespring dilations of channels and isometric protocol steps.

use super::{Channel, ChannelBlock};
use crate::error::{Error, Result};
use crate::hybrid::Label;
use crate::numerics::{identity, CMatrix, CVector, CHANNEL_TOL};

/// One direct summand of a dilation space H_x^A ⊗ H_x^B together with the
/// isometry component mapping into it. Rows are A-major: row a·dim_b + b.
#[derive(Debug, Clone)]
pub struct DilationBlock {
    pub label: Label,
    pub dim_a: usize,
    pub dim_b: usize,
    pub v: CMatrix,
}

/// An isometry V : H → ⊕ₓ H_x^A ⊗ H_x^B, stored blockwise. The associated
/// representation sends ⊕ₓ Bₓ to ⊕ₓ 1_x^A ⊗ Bₓ, so restricting to the B
/// factors and tracing the A factors recovers the dilated channel.
#[derive(Debug, Clone)]
pub struct StinespringDilation {
    pub input_dim: usize,
    pub blocks: Vec<DilationBlock>,
}

impl StinespringDilation {
    pub fn new(input_dim: usize, blocks: Vec<DilationBlock>) -> Result<Self> {
        let mut sum = CMatrix::zeros(input_dim, input_dim);
        for b in &blocks {
            if b.v.nrows() != b.dim_a * b.dim_b || b.v.ncols() != input_dim {
                return Err(Error::Shape(format!(
                    "dilation block [{}] is {}x{}, expected {}x{}",
                    b.label,
                    b.v.nrows(),
                    b.v.ncols(),
                    b.dim_a * b.dim_b,
                    input_dim
                )));
            }
            sum += b.v.adjoint() * &b.v;
        }
        let dev = crate::numerics::frobenius_norm(&(&sum - identity(input_dim)));
        if dev > CHANNEL_TOL * (input_dim as f64).sqrt().max(1.0) {
            return Err(Error::InvalidChannel(format!(
                "dilation not isometric: ‖ΣV†V − 1‖ = {:.3e}",
                dev
            )));
        }
        Ok(StinespringDilation { input_dim, blocks })
    }

    pub fn single(label: Label, dim_a: usize, dim_b: usize, v: CMatrix) -> Result<Self> {
        let input_dim = v.ncols();
        StinespringDilation::new(input_dim, vec![DilationBlock { label, dim_a, dim_b, v }])
    }

    pub fn block(&self, label: &Label) -> Option<&DilationBlock> {
        self.blocks.iter().find(|b| &b.label == label)
    }

    /// The channel obtained by tracing out every A factor: Kraus operators
    /// (⟨α| ⊗ 1_B) V_x per block.
    pub fn restriction_channel(&self) -> Result<Channel> {
        let mut blocks = Vec::new();
        for b in &self.blocks {
            let mut kraus = Vec::with_capacity(b.dim_a);
            for alpha in 0..b.dim_a {
                let mut k = CMatrix::zeros(b.dim_b, self.input_dim);
                for row in 0..b.dim_b {
                    for col in 0..self.input_dim {
                        k[(row, col)] = b.v[(alpha * b.dim_b + row, col)];
                    }
                }
                kraus.push(k);
            }
            blocks.push(ChannelBlock { label: b.label.clone(), out_dim: b.dim_b, kraus });
        }
        Channel::new(self.input_dim, blocks)
    }

    /// Applies V to a vector, returning per-block component vectors.
    pub fn apply_vector(&self, psi: &CVector) -> Vec<(Label, CVector)> {
        self.blocks
            .iter()
            .map(|b| (b.label.clone(), &b.v * psi))
            .collect()
    }
}

/// Builds the canonical dilation of a channel by stacking each block's
/// Kraus operators against an ancilla basis: V_x ψ = Σ_k |k⟩ ⊗ (K_{x,k} ψ).
/// The ancilla (A) factor has one basis vector per Kraus operator.
pub fn stinespring(c: &Channel) -> StinespringDilation {
    let blocks = c
        .blocks()
        .iter()
        .map(|block| {
            let dim_a = block.kraus.len();
            let dim_b = block.out_dim;
            let mut v = CMatrix::zeros(dim_a * dim_b, c.input_dim());
            for (k_idx, k) in block.kraus.iter().enumerate() {
                for row in 0..dim_b {
                    for col in 0..c.input_dim() {
                        v[(k_idx * dim_b + row, col)] = k[(row, col)];
                    }
                }
            }
            DilationBlock { label: block.label.clone(), dim_a, dim_b, v }
        })
        .collect();
    StinespringDilation { input_dim: c.input_dim(), blocks }
}

/// A locally coherent elementary step: one isometry block per message, with
/// Σ_m V_m†V_m = 1.
#[derive(Debug, Clone)]
pub struct BranchIsometry {
    pub input_dim: usize,
    /// (message symbol, retained dimension, message dimension, V).
    pub branches: Vec<(u16, usize, usize, CMatrix)>,
}

impl BranchIsometry {
    pub fn new(input_dim: usize, branches: Vec<(u16, usize, usize, CMatrix)>) -> Result<Self> {
        let mut sum = CMatrix::zeros(input_dim, input_dim);
        for (m, ret, msg, v) in &branches {
            if v.nrows() != ret * msg || v.ncols() != input_dim {
                return Err(Error::Shape(format!(
                    "branch isometry for message {} is {}x{}, expected {}x{}",
                    m,
                    v.nrows(),
                    v.ncols(),
                    ret * msg,
                    input_dim
                )));
            }
            sum += v.adjoint() * v;
        }
        let dev = crate::numerics::frobenius_norm(&(&sum - identity(input_dim)));
        if dev > CHANNEL_TOL * (input_dim as f64).sqrt().max(1.0) {
            return Err(Error::InvalidChannel(format!(
                "branch isometry incomplete: ‖ΣV†V − 1‖ = {:.3e}",
                dev
            )));
        }
        Ok(BranchIsometry { input_dim, branches })
    }
}
