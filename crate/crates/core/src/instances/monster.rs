//! The decoherence-monster commitment: Bob supplies a Haar-random state,
//! Alice encodes the bit with one of two isometries whose Bob restrictions
//! are a randomizing channel R and the completely depolarizing channel S.
//! The pair separates the plain norm (small, concealing once Bob's record
//! is shredded) from the cb-norm (near 2, binding). All Haar averages
//! reduce to exact second-moment formulas.

use crate::channels::{
    cb_lower_choi, depolarizing, haar_average_fidelity_cp, randomizing_channel, stinespring,
    Channel, StinespringDilation,
};
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, Seed, C64};
use crate::report::{CheckRow, F17};
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct MonsterInstance {
    pub d: usize,
    pub mu: usize,
    pub seed: Seed,
    pub r: Channel,
    pub s: Channel,
    /// Dilation of R: ancilla dimension μ.
    pub v0: StinespringDilation,
    /// Dilation of S: ancilla dimension d².
    pub v1: StinespringDilation,
}

pub fn monster_build(d: usize, mu: usize, seed: Seed) -> Result<MonsterInstance> {
    if d < 2 || mu < 1 {
        return Err(Error::Config("monster instance needs d >= 2 and mu >= 1".into()));
    }
    if mu > d * d {
        return Err(Error::Config("monster instance assumes mu <= d²".into()));
    }
    let r = randomizing_channel(d, mu, seed)?;
    let s = depolarizing(d);
    let v0 = stinespring(&r);
    let v1 = stinespring(&s);
    Ok(MonsterInstance { d, mu, seed, r, s, v0, v1 })
}

/// Leading-coordinate isometric embedding.
fn embed(from: usize, to: usize) -> Result<CMatrix> {
    if from > to {
        return Err(Error::Shape(format!("cannot embed dim {} into {}", from, to)));
    }
    let mut m = CMatrix::zeros(to, from);
    for i in 0..from {
        m[(i, i)] = C64::new(1.0, 0.0);
    }
    Ok(m)
}

#[derive(Debug, Clone, Serialize)]
pub struct PassiveCheatReport {
    pub p: F17,
    /// 2 − ‖Choi(R) − Choi(S)‖₁, the concealment defect.
    pub delta: F17,
    /// The inequality chain from the Choi bound down to the cheating
    /// probability, as checked margins.
    pub chain: Vec<CheckRow>,
    pub bound_holds: bool,
}

impl MonsterInstance {
    /// ‖(R−S)_* ⊗ id (|Ω⟩⟨Ω|)‖₁, engaging the low-rank Gram path at large
    /// dimension.
    pub fn choi_lower(&self) -> Result<f64> {
        cb_lower_choi(&self.r, &self.s)
    }

    /// Passive cheating: commit with V₀, open as 1. The success probability
    /// is the exact Haar average of |⟨V₁ψ|(ι⊗1)V₀ψ⟩|² with ι embedding the
    /// μ-dimensional ancilla into the d²-dimensional one.
    pub fn passive_cheat(&self) -> Result<PassiveCheatReport> {
        let d = self.d;
        let b0 = &self.v0.blocks[0];
        let b1 = &self.v1.blocks[0];
        if b0.dim_a > b1.dim_a {
            return Err(Error::Shape("ancilla embedding needs dim_A(0) <= dim_A(1)".into()));
        }
        // K = V₁†(ι⊗1)V₀ with ι the leading embedding: only the first
        // dim_A(0)·d rows of V₁ contribute.
        let k = b1.v.rows(0, b0.dim_a * d).adjoint() * &b0.v;
        let p = haar_average_fidelity_cp(&[k.clone()], d);

        let choi_dist = self.choi_lower()?;
        let delta = 2.0 - choi_dist;
        // Chain: 2 − δ ≤ Choi distance ≤ dilated pure distance
        //        = 2√(1 − F_c) ≤ 2√(1 − P + 1/d), and P ≤ 1/d + δ.
        let overlap = crate::numerics::trace(&k).norm_sqr() / (d * d) as f64;
        let dilated = 2.0 * (1.0 - overlap).max(0.0).sqrt();
        let fc_term = 2.0 * (1.0 - overlap).max(0.0).sqrt();
        let avg_term = 2.0 * (1.0 - p + 1.0 / d as f64).max(0.0).sqrt();
        let chain = vec![
            CheckRow::new("choi_distance_vs_delta", choi_dist - (2.0 - delta)),
            CheckRow::new("dilated_pure_dominates_choi", dilated - choi_dist),
            CheckRow::new("fc_equals_dilated", 1e-12 - (fc_term - dilated).abs()),
            CheckRow::new("avg_dominates_fc", avg_term - fc_term),
            CheckRow::new("passive_bound", 1.0 / d as f64 + delta - p),
        ];
        let bound_holds = chain.iter().all(|c| c.passed);
        Ok(PassiveCheatReport { p: F17(p), delta: F17(delta), chain, bound_holds })
    }

    /// Honest play for bit k as a general attack (perfect soundness).
    pub fn honest_attack(&self, bit: u8) -> Result<MonsterAttack> {
        let b = if bit == 0 { &self.v0.blocks[0] } else { &self.v1.blocks[0] };
        let sharp_dim = b.dim_a;
        let t_sharp = Channel::from_kraus(self.d, sharp_dim * self.d, vec![b.v.clone()])?;
        let other_dim =
            if bit == 0 { self.v1.blocks[0].dim_a } else { self.v0.blocks[0].dim_a };
        let (t0, t1);
        let own = Channel::identity(sharp_dim);
        // Opening the other bit hands over the ancilla embedded or
        // compressed; completeness requires a full channel, so compression
        // resets to the ground state outside the smaller space.
        let cross = if sharp_dim <= other_dim {
            Channel::from_kraus(sharp_dim, other_dim, vec![embed(sharp_dim, other_dim)?])?
        } else {
            let mut kraus = Vec::new();
            for i in 0..sharp_dim {
                let mut k = CMatrix::zeros(other_dim, sharp_dim);
                k[(i.min(other_dim - 1), i)] = C64::new(1.0, 0.0);
                kraus.push(k);
            }
            Channel::from_kraus(sharp_dim, other_dim, kraus)?
        };
        if bit == 0 {
            t0 = own;
            t1 = cross;
        } else {
            t1 = own;
            t0 = cross;
        }
        Ok(MonsterAttack { sharp_dim, t_sharp, t0, t1 })
    }

    /// The passive cheat embedded as a general attack: commit with V₀,
    /// open 0 honestly, open 1 through the ancilla embedding.
    pub fn passive_attack(&self) -> Result<MonsterAttack> {
        self.honest_attack(0)
    }

    /// Exact success probability P = ½P₀ + ½P₁ of a general attack, with
    /// the concealment-defect bound ½ + 1/d + ½√δ.
    pub fn general_attack(&self, attack: &MonsterAttack) -> Result<GeneralAttackReport> {
        let d = self.d;
        if attack.t_sharp.input_dim() != d
            || attack.t_sharp.single_out_dim()? != attack.sharp_dim * d
        {
            return Err(Error::Shape("attack commit channel has wrong shape".into()));
        }
        let mut ps = [0.0f64; 2];
        for bit in 0..2usize {
            let v = if bit == 0 { &self.v0.blocks[0] } else { &self.v1.blocks[0] };
            let opener = if bit == 0 { &attack.t0 } else { &attack.t1 };
            if opener.input_dim() != attack.sharp_dim || opener.single_out_dim()? != v.dim_a {
                return Err(Error::Shape(format!(
                    "attack opener for bit {} has wrong shape",
                    bit
                )));
            }
            let mut kraus = Vec::new();
            for a in &attack.t_sharp.blocks()[0].kraus {
                for b in &opener.blocks()[0].kraus {
                    let big = crate::numerics::kron_u(b, &crate::numerics::identity(d));
                    kraus.push(v.v.adjoint() * &big * a);
                }
            }
            ps[bit] = haar_average_fidelity_cp(&kraus, d);
        }
        let p = 0.5 * (ps[0] + ps[1]);
        let delta = 2.0 - self.choi_lower()?;
        let bound = 0.5 + 1.0 / d as f64 + 0.5 * delta.max(0.0).sqrt();
        Ok(GeneralAttackReport {
            p: F17(p),
            p0: F17(ps[0]),
            p1: F17(ps[1]),
            bound: F17(bound),
            bound_holds: p <= bound + 1e-9,
        })
    }

    /// Acceptance of fully honest play for both bits; each must be 1.
    pub fn honest_acceptance(&self) -> Result<(f64, f64)> {
        let a0 = self.general_attack(&self.honest_attack(0)?)?;
        let a1 = self.general_attack(&self.honest_attack(1)?)?;
        Ok((a0.p0.0, a1.p1.0))
    }
}

/// A general cheating attack: a commit channel T♯ : B(H_B) → B(H_♯ ⊗ H_B)
/// applied before committing to either bit, and per-bit opening channels
/// T_k♯ : B(H_♯) → B(H_A^k).
#[derive(Debug, Clone)]
pub struct MonsterAttack {
    pub sharp_dim: usize,
    pub t_sharp: Channel,
    pub t0: Channel,
    pub t1: Channel,
}

impl MonsterAttack {
    /// Seeded random attack with a given kept-system dimension.
    pub fn random(inst: &MonsterInstance, sharp_dim: usize, seed: Seed) -> Result<Self> {
        let d = inst.d;
        let t_sharp =
            crate::channels::random_channel_shaped(d, sharp_dim * d, 2, seed.child(0))?;
        let t0 = crate::channels::random_channel_shaped(
            sharp_dim,
            inst.v0.blocks[0].dim_a,
            2,
            seed.child(1),
        )?;
        let t1 = crate::channels::random_channel_shaped(
            sharp_dim,
            inst.v1.blocks[0].dim_a,
            2,
            seed.child(2),
        )?;
        Ok(MonsterAttack { sharp_dim, t_sharp, t0, t1 })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneralAttackReport {
    pub p: F17,
    pub p0: F17,
    pub p1: F17,
    pub bound: F17,
    pub bound_holds: bool,
}
