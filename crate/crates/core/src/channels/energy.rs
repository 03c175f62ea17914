//! Finite-dimensional energy truncation of channels under a global
//! constraint tr(ρH) ≤ E.

use super::Channel;
use crate::error::{Error, Result};
use crate::numerics::{
    hermitian_eigen, is_hermitian, trace, trace_norm, CMatrix, DensityMatrix, Seed, C64,
};
use rand::Rng;

/// An energy operator H together with the global bound E.
#[derive(Debug, Clone)]
pub struct EnergyConstraint {
    hamiltonian: CMatrix,
    bound: f64,
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl EnergyConstraint {
    pub fn new(hamiltonian: CMatrix, bound: f64) -> Result<Self> {
        if !is_hermitian(&hamiltonian, 1e-10) {
            return Err(Error::Domain("energy operator must be Hermitian".into()));
        }
        let (eigenvalues, eigenvectors) = hermitian_eigen(&hamiltonian);
        Ok(EnergyConstraint { hamiltonian, bound, eigenvalues, eigenvectors })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn energy(&self, rho: &DensityMatrix) -> f64 {
        trace(&(rho.matrix() * &self.hamiltonian)).re
    }

    pub fn satisfies(&self, rho: &DensityMatrix, tol: f64) -> bool {
        self.energy(rho) <= self.bound + tol
    }

    fn ground_index(&self) -> usize {
        let mut idx = 0;
        for (i, v) in self.eigenvalues.iter().enumerate() {
            if *v < self.eigenvalues[idx] {
                idx = i;
            }
        }
        idx
    }

    /// Spectral projector onto eigenvalues ≤ cutoff.
    pub fn spectral_projector(&self, cutoff: f64) -> (CMatrix, usize) {
        let dim = self.dim();
        let mut p = CMatrix::zeros(dim, dim);
        let mut rank = 0usize;
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            if l <= cutoff {
                rank += 1;
                let col = self.eigenvectors.column(k);
                for i in 0..dim {
                    for j in 0..dim {
                        p[(i, j)] += col[i] * col[j].conj();
                    }
                }
            }
        }
        (p, rank)
    }
}

/// Energy-truncated channel: ρ ↦ P T_*(PρP) P renormalized, with P the
/// spectral projector onto energies ≤ E/γ.
#[derive(Debug, Clone)]
pub struct TruncatedChannel {
    kraus: Vec<CMatrix>,
    pub projector: CMatrix,
    pub rank: usize,
    /// The guaranteed trace-distance bound 4√γ + 2γ/(1−γ) on constrained
    /// inputs.
    pub bound: f64,
}

impl TruncatedChannel {
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let mut out = CMatrix::zeros(self.projector.nrows(), self.projector.ncols());
        for k in &self.kraus {
            out += k * rho.matrix() * k.adjoint();
        }
        let w = trace(&out).re;
        if w < 1e-14 {
            return Err(Error::Domain(
                "truncated channel annihilated the input state".into(),
            ));
        }
        Ok(DensityMatrix::new_unchecked(out / C64::new(w, 0.0)))
    }
}

/// Compresses a channel to the low-energy subspace. Pre-checks on sampled
/// constrained inputs that the channel respects the constraint.
pub fn energy_truncate(
    c: &Channel,
    ec: &EnergyConstraint,
    gamma: f64,
    check: Option<(usize, Seed)>,
) -> Result<TruncatedChannel> {
    if !(0.0 < gamma && gamma < 1.0) {
        return Err(Error::Domain(format!("gamma {} outside (0,1)", gamma)));
    }
    if c.blocks().len() != 1 || c.input_dim() != ec.dim() || c.blocks()[0].out_dim != ec.dim() {
        return Err(Error::Shape(
            "energy_truncate requires a square single-block channel on the constrained space"
                .into(),
        ));
    }
    if let Some((trials, seed)) = check {
        for t in 0..trials {
            let rho = sample_constrained_state(ec, seed.child(t as u64))?;
            let out = c.apply_density(&rho)?;
            if !ec.satisfies(&out, 1e-8) {
                return Err(Error::Domain(format!(
                    "channel violates the energy constraint: tr(T(ρ)H) = {} > {}",
                    ec.energy(&out),
                    ec.bound()
                )));
            }
        }
    }
    let cutoff = ec.bound() / gamma;
    let (p, rank) = ec.spectral_projector(cutoff);
    let kraus = c.blocks()[0]
        .kraus
        .iter()
        .map(|k| &p * k * &p)
        .collect();
    let bound = 4.0 * gamma.sqrt() + 2.0 * gamma / (1.0 - gamma);
    Ok(TruncatedChannel { kraus, projector: p, rank, bound })
}

/// Samples a state satisfying tr(ρH) ≤ E by mixing a random density matrix
/// toward the ground state until a uniformly drawn energy target is met.
pub fn sample_constrained_state(ec: &EnergyConstraint, seed: Seed) -> Result<DensityMatrix> {
    let mut rng = seed.rng();
    let dim = ec.dim();
    let ground_idx = ec.ground_index();
    let h_min = ec.eigenvalues[ground_idx];
    if h_min > ec.bound() {
        return Err(Error::Domain(format!(
            "ground energy {} exceeds the bound {}",
            h_min,
            ec.bound()
        )));
    }
    let ground = ec.eigenvectors.column(ground_idx).into_owned();
    let ground_proj = &ground * ground.adjoint();

    let mut m = CMatrix::zeros(dim, dim);
    for w in [0.5, 0.3, 0.2] {
        let v = crate::numerics::haar_state_rng(dim, &mut rng);
        m += (&v * v.adjoint()).scale(w);
    }
    let rho = DensityMatrix::new_unchecked(m);
    let e_rho = ec.energy(&rho);
    let target = h_min + rng.random::<f64>() * (ec.bound() - h_min);
    if e_rho <= target {
        return Ok(rho);
    }
    // Mix toward the ground state to land exactly on the target energy.
    let t = (e_rho - target) / (e_rho - h_min);
    let mixed = rho.matrix().scale(1.0 - t) + ground_proj.scale(t);
    Ok(DensityMatrix::new_unchecked(mixed))
}

/// Seeded random channel that never increases energy: a mixture of a
/// dephasing-phase unitary in the energy eigenbasis, amplitude damping
/// toward lower energy levels, and a reset to the ground state.
pub fn random_energy_respecting_channel(ec: &EnergyConstraint, seed: Seed) -> Result<Channel> {
    let mut rng = seed.rng();
    let dim = ec.dim();
    // Work in the (sorted) energy eigenbasis.
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| ec.eigenvalues[a].partial_cmp(&ec.eigenvalues[b]).unwrap());
    let basis: Vec<crate::numerics::CVector> =
        order.iter().map(|&k| ec.eigenvectors.column(k).into_owned()).collect();

    let p_unitary: f64 = 0.2 + 0.5 * rng.random::<f64>();
    let p_damp: f64 = (1.0 - p_unitary) * rng.random::<f64>();
    let p_reset = 1.0 - p_unitary - p_damp;

    let mut kraus: Vec<CMatrix> = Vec::new();
    // Diagonal phase unitary in the energy basis (energy preserving).
    {
        let mut u = CMatrix::zeros(dim, dim);
        for b in &basis {
            let phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            u += (b * b.adjoint()) * C64::new(phase.cos(), phase.sin());
        }
        kraus.push(u.scale(p_unitary.sqrt()));
    }
    // Amplitude damping along the sorted energy ladder.
    {
        let rates: Vec<f64> = (0..dim).map(|n| if n == 0 { 0.0 } else { rng.random::<f64>() }).collect();
        let mut a0 = CMatrix::zeros(dim, dim);
        for n in 0..dim {
            a0 += (&basis[n] * basis[n].adjoint()).scale((1.0 - rates[n]).sqrt());
        }
        kraus.push(a0.scale(p_damp.sqrt()));
        for n in 1..dim {
            if rates[n] > 0.0 {
                let jump = (&basis[n - 1] * basis[n].adjoint()).scale(rates[n].sqrt());
                kraus.push(jump.scale(p_damp.sqrt()));
            }
        }
    }
    // Reset to the ground state.
    for n in 0..dim {
        let k = (&basis[0] * basis[n].adjoint()).scale(p_reset.sqrt());
        kraus.push(k);
    }
    Channel::from_kraus(dim, dim, kraus)
}

/// Convenience: the deviation ‖T_*(ρ) − compressed(ρ)‖₁ to compare against
/// the bound.
pub fn truncation_deviation(
    c: &Channel,
    tc: &TruncatedChannel,
    rho: &DensityMatrix,
) -> Result<f64> {
    let full = c.apply_density(rho)?;
    let compressed = tc.apply(rho)?;
    Ok(trace_norm(&(full.matrix() - compressed.matrix())))
}
