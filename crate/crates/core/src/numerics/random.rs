//! Seeded random sampling: Ginibre matrices, Haar unitaries, Haar states.

use super::matrix::{CMatrix, CVector, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Reproducible random stream: identical (seed, stream) pairs yield
/// bit-identical sample sequences. Parallel trials derive independent
/// streams with [`Seed::child`]; results must never depend on worker count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seed {
    pub value: u64,
    #[serde(default)]
    pub stream: u64,
}

impl Seed {
    pub fn new(value: u64, stream: u64) -> Self {
        Seed { value, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.value);
        rng.set_stream(self.stream);
        rng
    }

    /// Derives the i-th independent child stream.
    pub fn child(&self, i: u64) -> Seed {
        Seed {
            value: self.value,
            stream: splitmix64(self.stream ^ (i.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        }
    }
}

impl From<u64> for Seed {
    fn from(value: u64) -> Self {
        Seed { value, stream: 0 }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Matrix of i.i.d. standard complex Gaussians (variance 1 per entry).
pub fn ginibre<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    })
}

/// Haar-distributed unitary via Ginibre + QR with the phases of R's diagonal
/// absorbed into Q.
pub fn haar_unitary_rng<R: Rng>(dim: usize, rng: &mut R) -> CMatrix {
    assert!(dim >= 1);
    let g = ginibre(dim, dim, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn haar_unitary(dim: usize, seed: Seed) -> CMatrix {
    haar_unitary_rng(dim, &mut seed.rng())
}

/// Haar-random unit vector (normalized complex Gaussian).
pub fn haar_state_rng<R: Rng>(dim: usize, rng: &mut R) -> CVector {
    loop {
        let v = ginibre(dim, 1, rng).column(0).into_owned();
        let n = v.norm();
        if n > 1e-12 {
            return v.unscale(n);
        }
    }
}

pub fn haar_state(dim: usize, seed: Seed) -> CVector {
    haar_state_rng(dim, &mut seed.rng())
}
