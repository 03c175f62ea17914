//! Special channel constructions: randomizing mixtures of unitaries, the
//! completely depolarizing channel, measure-and-prepare channels, basis
//! measurements and seeded random channels.

use super::{Channel, ChannelBlock, ChannelKind};
use crate::error::{Error, Result};
use crate::hybrid::Label;
use crate::numerics::{
    haar_unitary_rng, hermitian_eigen, identity, sqrt_psd, CMatrix, DensityMatrix, Seed,
    CHANNEL_TOL,
};
use serde::{Deserialize, Serialize};

/// Regeneration parameters for a randomizing channel; embedded in reports
/// so the unitary list can be re-derived from the seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomizingOrigin {
    pub dim: usize,
    pub mu: usize,
    pub seed: Seed,
}

/// R_*(ρ) = μ⁻¹ Σᵢ Uᵢ ρ Uᵢ† with Haar-sampled unitaries; Kraus operators
/// are Uᵢ/√μ.
pub fn randomizing_channel(dim: usize, mu: usize, seed: Seed) -> Result<Channel> {
    if dim < 2 {
        return Err(Error::Config("randomizing channel needs d >= 2".into()));
    }
    if mu < 1 {
        return Err(Error::Config("randomizing channel needs mu >= 1".into()));
    }
    let scale = 1.0 / (mu as f64).sqrt();
    let kraus: Vec<CMatrix> = (0..mu)
        .map(|i| haar_unitary_rng(dim, &mut seed.child(i as u64).rng()).scale(scale))
        .collect();
    Channel::with_kind(
        dim,
        vec![ChannelBlock { label: Label::root(), out_dim: dim, kraus }],
        ChannelKind::RandomUnitary,
        Some(RandomizingOrigin { dim, mu, seed }),
    )
}

/// Number of unitaries sufficient for ε-randomization, ⌈134/ε² · d·log d⌉.
/// The logarithm base is a parameter; natural log by default.
pub fn mu_star(dim: usize, eps: f64, log_base: Option<f64>) -> u64 {
    let log = match log_base {
        Some(b) => (dim as f64).ln() / b.ln(),
        None => (dim as f64).ln(),
    };
    (134.0 / (eps * eps) * dim as f64 * log).ceil() as u64
}

/// S_*(ρ) = tr(ρ)·1/d; Kraus operators |i⟩⟨j|/√d.
pub fn depolarizing(dim: usize) -> Channel {
    let scale = 1.0 / (dim as f64).sqrt();
    let mut kraus = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut k = CMatrix::zeros(dim, dim);
            k[(i, j)] = crate::channels::c64(scale, 0.0);
            kraus.push(k);
        }
    }
    Channel::with_kind(
        dim,
        vec![ChannelBlock { label: Label::root(), out_dim: dim, kraus }],
        ChannelKind::Depolarizing,
        None,
    )
    .expect("depolarizing channel")
}

/// Measure-and-prepare (entanglement-breaking) channel
/// ρ ↦ Σₓ tr(Mₓ ρ) σₓ for a POVM {Mₓ} and prepared states {σₓ}.
pub fn measure_prepare(povm: &[CMatrix], states: &[DensityMatrix]) -> Result<Channel> {
    if povm.is_empty() || povm.len() != states.len() {
        return Err(Error::InvalidChannel(
            "measure_prepare needs matching POVM elements and states".into(),
        ));
    }
    let dim = povm[0].nrows();
    let out_dim = states[0].dim();
    let mut sum = CMatrix::zeros(dim, dim);
    for m in povm {
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::InvalidChannel("POVM element shape mismatch".into()));
        }
        let (vals, _) = hermitian_eigen(m);
        if vals.iter().any(|&l| l < -CHANNEL_TOL) {
            return Err(Error::InvalidChannel("POVM element not PSD".into()));
        }
        sum += m;
    }
    if crate::numerics::frobenius_norm(&(&sum - identity(dim))) > CHANNEL_TOL * (dim as f64).sqrt()
    {
        return Err(Error::InvalidChannel("POVM does not sum to identity".into()));
    }

    let mut kraus = Vec::new();
    for (m, sigma) in povm.iter().zip(states.iter()) {
        if sigma.dim() != out_dim {
            return Err(Error::InvalidChannel("prepared state dims differ".into()));
        }
        let a = sqrt_psd(m);
        let (vals, vecs) = hermitian_eigen(sigma.matrix());
        for (l_idx, &lam) in vals.iter().enumerate() {
            if lam <= 1e-14 {
                continue;
            }
            let w = vecs.column(l_idx);
            for j in 0..dim {
                // K = √λ |w⟩⟨j| √Mₓ : rank-one from measurement row j.
                let mut k = CMatrix::zeros(out_dim, dim);
                for r in 0..out_dim {
                    for c in 0..dim {
                        k[(r, c)] = w[r] * lam.sqrt() * a[(j, c)];
                    }
                }
                kraus.push(k);
            }
        }
    }
    Channel::from_kraus(dim, out_dim, kraus)
}

/// Von Neumann measurement in a given orthonormal basis: labeled blocks with
/// 1-based singleton labels and one-dimensional outputs.
pub fn measurement_in_basis(basis: &[crate::numerics::CVector]) -> Result<Channel> {
    let dim = basis.len();
    let blocks = basis
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let mut k = CMatrix::zeros(1, dim);
            for c in 0..dim {
                k[(0, c)] = v[c].conj();
            }
            ChannelBlock { label: Label(vec![(j + 1) as u16]), out_dim: 1, kraus: vec![k] }
        })
        .collect();
    Channel::new(dim, blocks)
}

/// Seeded random channel between different input and output dimensions:
/// the first `in_dim` columns of a Haar unitary on out_dim·kraus_count
/// sliced into Kraus blocks.
pub fn random_channel_shaped(
    in_dim: usize,
    out_dim: usize,
    kraus_count: usize,
    seed: Seed,
) -> Result<Channel> {
    if out_dim * kraus_count < in_dim {
        return Err(Error::Config(format!(
            "random channel {}→{} needs at least {} Kraus operators",
            in_dim,
            out_dim,
            (in_dim + out_dim - 1) / out_dim
        )));
    }
    let mut rng = seed.rng();
    let big = haar_unitary_rng(out_dim * kraus_count, &mut rng);
    let kraus: Vec<CMatrix> = (0..kraus_count)
        .map(|k| {
            let mut m = CMatrix::zeros(out_dim, in_dim);
            for i in 0..out_dim {
                for j in 0..in_dim {
                    m[(i, j)] = big[(k * out_dim + i, j)];
                }
            }
            m
        })
        .collect();
    Channel::from_kraus(in_dim, out_dim, kraus)
}

/// Seeded random channel with `kraus_count` Kraus operators, obtained by
/// slicing a Haar-random isometry into an ancilla.
pub fn random_channel(dim: usize, kraus_count: usize, seed: Seed) -> Channel {
    let mut rng = seed.rng();
    let big = haar_unitary_rng(dim * kraus_count, &mut rng);
    // Isometry = first `dim` columns; slice into kraus_count blocks of rows.
    let kraus: Vec<CMatrix> = (0..kraus_count)
        .map(|k| {
            let mut m = CMatrix::zeros(dim, dim);
            for i in 0..dim {
                for j in 0..dim {
                    m[(i, j)] = big[(k * dim + i, j)];
                }
            }
            m
        })
        .collect();
    Channel::from_kraus(dim, dim, kraus).expect("random channel")
}
