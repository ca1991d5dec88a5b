use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::qgeom::CMatrix;

/// Independent generator for one gate slot. The 256-bit key is the tuple
/// `(master_seed, trajectory, layer, position)`, so any slot can be
/// regenerated without touching the others.
pub fn gate_rng(master_seed: u64, trajectory: u64, layer: u64, position: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    for (chunk, word) in seed.chunks_exact_mut(8).zip([master_seed, trajectory, layer, position]) {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn haar_phase<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::from_polar(1.0, rng.random::<f64>() * TAU)
}

/// Haar-random 2x2 unitary: Gram-Schmidt on the columns of a complex Ginibre
/// matrix, which is QR with a positive diagonal in `R`.
pub fn haar_2x2<R: Rng + ?Sized>(rng: &mut R) -> [[C64; 2]; 2] {
    loop {
        let g = [[complex_gaussian(rng), complex_gaussian(rng)], [complex_gaussian(rng), complex_gaussian(rng)]];
        let c0 = [g[0][0], g[1][0]];
        let c1 = [g[0][1], g[1][1]];
        let n0 = (c0[0].norm_sqr() + c0[1].norm_sqr()).sqrt();
        if n0 < 1e-12 {
            continue;
        }
        let q0 = [c0[0] / n0, c0[1] / n0];
        let proj = q0[0].conj() * c1[0] + q0[1].conj() * c1[1];
        let r1 = [c1[0] - proj * q0[0], c1[1] - proj * q0[1]];
        let n1 = (r1[0].norm_sqr() + r1[1].norm_sqr()).sqrt();
        if n1 < 1e-12 {
            continue;
        }
        let q1 = [r1[0] / n1, r1[1] / n1];
        return [[q0[0], q1[0]], [q0[1], q1[1]]];
    }
}

/// Haar-random `n x n` unitary for `n` in `{1, 2}`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CMatrix> {
    match n {
        1 => Ok(CMatrix::from_element(1, 1, haar_phase(rng))),
        2 => {
            let u = haar_2x2(rng);
            Ok(CMatrix::from_row_slice(2, 2, &[u[0][0], u[0][1], u[1][0], u[1][1]]))
        }
        _ => Err(Error::Configuration(format!("haar_unitary supports n in {{1, 2}}, got {n}"))),
    }
}

/// Two-qubit gate commuting with the total charge: a phase on `|up up>`, a
/// 2x2 unitary on `{|up down>, |down up>}` and a phase on `|down down>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymGate {
    pub phase_up: C64,
    /// Basis order: `|up down>`, `|down up>` for the `(a, b)` pair.
    pub mid: [[C64; 2]; 2],
    pub phase_down: C64,
}

impl SymGate {
    pub fn identity() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Self { phase_up: one, mid: [[one, zero], [zero, one]], phase_down: one }
    }

    /// Dense 4x4 matrix in the basis `|a b>` = `|uu>, |ud>, |du>, |dd>`.
    pub fn to_matrix(&self) -> CMatrix {
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = self.phase_up;
        m[(1, 1)] = self.mid[0][0];
        m[(1, 2)] = self.mid[0][1];
        m[(2, 1)] = self.mid[1][0];
        m[(2, 2)] = self.mid[1][1];
        m[(3, 3)] = self.phase_down;
        m
    }
}

/// Draws the three blocks independently from their Haar measures.
pub fn sample_gate<R: Rng + ?Sized>(rng: &mut R) -> SymGate {
    let phase_up = haar_phase(rng);
    let mid = haar_2x2(rng);
    let phase_down = haar_phase(rng);
    SymGate { phase_up, mid, phase_down }
}
