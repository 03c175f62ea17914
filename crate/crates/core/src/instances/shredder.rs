//! The notarized shredder commitment: Alice, watched by a notary public,
//! prepares one of two mixed states built from a mutually unbiased basis
//! pair; Bob verifies with the support projectors. Any cheat channel on
//! Alice's retained factor passes with probability exactly 1/d.
//!
//! The notary makes the mixed preparations literal: this instance never
//! purifies Alice's strategy, its security argument presumes the mixture.

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::numerics::{
    fourier_mub, frobenius_norm, identity, kron_u, kron_vec, partial_trace, trace, CMatrix,
    CVector, DensityMatrix,
};
use crate::report::F17;
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct ShredderInstance {
    pub d: usize,
    /// Commit states on (retained) ⊗ (sent): ρ_k = d⁻¹ Σ_j |v_j v̄_j⟩⟨…|.
    pub rho0: DensityMatrix,
    pub rho1: DensityMatrix,
    /// Verification projectors P_k = d·ρ_k.
    pub p0: CMatrix,
    pub p1: CMatrix,
}

impl ShredderInstance {
    pub fn new(d: usize) -> Result<Self> {
        let (e, f) = fourier_mub(d);
        let scale = 1.0 / d as f64;
        let mut m0 = CMatrix::zeros(d * d, d * d);
        let mut m1 = CMatrix::zeros(d * d, d * d);
        for j in 0..d {
            let ee = kron_vec(&e[j], &e[j]);
            m0 += (&ee * ee.adjoint()).scale(scale);
            let fbar: CVector = f[j].map(|z| z.conj());
            let ff = kron_vec(&f[j], &fbar);
            m1 += (&ff * ff.adjoint()).scale(scale);
        }
        let rho0 = DensityMatrix::new(m0)?;
        let rho1 = DensityMatrix::new(m1)?;
        let p0 = rho0.matrix().scale(d as f64);
        let p1 = rho1.matrix().scale(d as f64);
        for (name, p) in [("P0", &p0), ("P1", &p1)] {
            let dev = frobenius_norm(&(p * p - p));
            if dev > 1e-10 {
                return Err(Error::Domain(format!("{} is not a projector: {:.3e}", name, dev)));
            }
        }
        Ok(ShredderInstance { d, rho0, rho1, p0, p1 })
    }

    /// Bob's marginals of both commit states; each must be the chaotic
    /// state 1/d.
    pub fn bob_marginal_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for rho in [&self.rho0, &self.rho1] {
            let red = partial_trace(rho.matrix(), &[self.d, self.d], &[1]).expect("marginal");
            let dev = frobenius_norm(&(red - identity(self.d).unscale(self.d as f64)));
            worst = worst.max(dev);
        }
        worst
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShredderReport {
    pub d: usize,
    /// Per cheat channel: (tr ρ₀ (T⊗id)(P₁), tr ρ₁ (T⊗id)(P₀)).
    pub success: Vec<(F17, F17)>,
    pub bob_marginal_deviation: F17,
    /// Sample variance of all success probabilities (channel independence).
    pub variance: F17,
}

/// Evaluates cheat channels acting on Alice's retained factor only.
pub fn shredder_eval(inst: &ShredderInstance, cheats: &[Channel]) -> Result<ShredderReport> {
    let d = inst.d;
    let mut success = Vec::with_capacity(cheats.len());
    let mut values = Vec::new();
    for t in cheats {
        if t.input_dim() != d || t.single_out_dim()? != d {
            return Err(Error::Shape(format!(
                "cheat channel is {}→{}, instance needs {}→{}",
                t.input_dim(),
                t.single_out_dim()?,
                d,
                d
            )));
        }
        // (T ⊗ id)(ρ_k) via Kraus ⊗ 1.
        let apply = |rho: &DensityMatrix| -> CMatrix {
            let mut out = CMatrix::zeros(d * d, d * d);
            for k in &t.blocks()[0].kraus {
                let big = kron_u(k, &identity(d));
                out += &big * rho.matrix() * big.adjoint();
            }
            out
        };
        let p01 = trace(&(apply(&inst.rho0) * &inst.p1)).re;
        let p10 = trace(&(apply(&inst.rho1) * &inst.p0)).re;
        success.push((F17(p01), F17(p10)));
        values.push(p01);
        values.push(p10);
    }
    let variance = if values.len() > 1 {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (values.len() - 1) as f64
    } else {
        0.0
    };
    Ok(ShredderReport {
        d,
        success,
        bob_marginal_deviation: F17(inst.bob_marginal_deviation()),
        variance: F17(variance),
    })
}
