use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::gate::SymGate;
use crate::error::{Error, Result};
use crate::qgeom::{CMatrix, DensityMatrix};

/// Pure state of `n_qubits` spins. Bit `q` of an amplitude index is qubit
/// `q`; a zero bit is spin up (`sigma_z = +1`).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::LengthMismatch(format!("{} amplitudes for {n_qubits} qubits", amplitudes.len())));
        }
        let s = Self { n_qubits, amplitudes };
        let norm = s.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!("state norm {norm}")));
        }
        Ok(s)
    }

    /// Computational basis state with the given bit pattern.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[index] = C64::new(1.0, 0.0);
        Self { n_qubits, amplitudes }
    }

    /// Tensor product of single-qubit states `(up, down)`, qubit 0 first.
    pub fn product(sites: &[[C64; 2]]) -> Self {
        let mut amplitudes = vec![C64::new(1.0, 0.0)];
        for site in sites {
            let mut next = Vec::with_capacity(amplitudes.len() * 2);
            // new qubit becomes the highest bit
            next.extend(amplitudes.iter().map(|a| a * site[0]));
            next.extend(amplitudes.iter().map(|a| a * site[1]));
            amplitudes = next;
        }
        Self { n_qubits: sites.len(), amplitudes }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<Q>` with `Q = sum_i sigma_z^i`.
    pub fn charge(&self) -> f64 {
        let n = self.n_qubits as i64;
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(idx, a)| a.norm_sqr() * (n - 2 * idx.count_ones() as i64) as f64)
            .sum()
    }

    /// Applies `gate` to the ordered pair `(qa, qb)` in place.
    pub fn apply_gate(&mut self, gate: &SymGate, qa: usize, qb: usize) -> Result<()> {
        for q in [qa, qb] {
            if q >= self.n_qubits {
                return Err(Error::IndexOutOfRange { index: q, n_qubits: self.n_qubits });
            }
        }
        if qa == qb {
            return Err(Error::Configuration(format!("gate needs two distinct qubits, got {qa} twice")));
        }
        let (ma, mb) = (1usize << qa, 1usize << qb);
        let [[m00, m01], [m10, m11]] = gate.mid;
        let amps = &mut self.amplitudes;
        for base in 0..amps.len() {
            if base & (ma | mb) != 0 {
                continue;
            }
            let ud = base | mb; // a up, b down
            let du = base | ma;
            let dd = base | ma | mb;
            amps[base] *= gate.phase_up;
            amps[dd] *= gate.phase_down;
            let (x, y) = (amps[ud], amps[du]);
            amps[ud] = m00 * x + m01 * y;
            amps[du] = m10 * x + m11 * y;
        }
        Ok(())
    }
}

/// Out-of-place form of [`StateVector::apply_gate`].
pub fn apply_gate(psi: &StateVector, gate: &SymGate, qa: usize, qb: usize) -> Result<StateVector> {
    let mut out = psi.clone();
    out.apply_gate(gate, qa, qb)?;
    Ok(out)
}

/// Contiguous block of qubits kept by the partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitRange {
    pub start: usize,
    pub len: usize,
}

impl QubitRange {
    pub fn new(start: usize, len: usize) -> Self {
        Self { start, len }
    }
}

/// Reduced density matrix of `range`, tracing out every other qubit.
pub fn reduce(psi: &StateVector, range: QubitRange) -> Result<DensityMatrix> {
    let QubitRange { start, len } = range;
    if len == 0 || start + len > psi.n_qubits {
        return Err(Error::Configuration(format!(
            "subsystem {start}..{} outside {} qubits",
            start + len,
            psi.n_qubits
        )));
    }
    let dim = 1usize << len;
    let block_mask = (dim - 1) << start;
    let amps = psi.amplitudes();
    let mut rho = CMatrix::zeros(dim, dim);
    let mut column = vec![C64::new(0.0, 0.0); dim];
    for rest in 0..amps.len() {
        if rest & block_mask != 0 {
            continue;
        }
        for (k, c) in column.iter_mut().enumerate() {
            *c = amps[rest | (k << start)];
        }
        for i in 0..dim {
            if column[i] == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..dim {
                rho[(i, j)] += column[i] * column[j].conj();
            }
        }
    }
    let trace = rho.trace().re;
    rho /= C64::new(trace, 0.0);
    DensityMatrix::new(rho)
}

/// Reference configuration before the global tilt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateFamily {
    /// `|up down up down ...>`
    Neel,
    /// `|up up ... up>`
    Ferro,
    /// First half up, second half down.
    FerroDomainWall,
}

impl StateFamily {
    pub fn name(self) -> &'static str {
        match self {
            StateFamily::Neel => "neel",
            StateFamily::Ferro => "ferro",
            StateFamily::FerroDomainWall => "ferro-domain-wall",
        }
    }

    /// Whether qubit `i` of `n` starts spin up.
    pub fn starts_up(self, i: usize, n: usize) -> bool {
        match self {
            StateFamily::Neel => i.is_multiple_of(2),
            StateFamily::Ferro => true,
            StateFamily::FerroDomainWall => i < n / 2,
        }
    }
}

impl fmt::Display for StateFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StateFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "neel" => Ok(StateFamily::Neel),
            "ferro" => Ok(StateFamily::Ferro),
            "ferro-domain-wall" | "domain-wall" => Ok(StateFamily::FerroDomainWall),
            other => Err(Error::Configuration(format!("unknown state family '{other}'"))),
        }
    }
}

/// `exp(-i theta/2 sum_i sigma_y^i) |psi_0>`.
pub fn initial_state(family: StateFamily, theta: f64, n_qubits: usize) -> Result<StateVector> {
    if n_qubits == 0 || !n_qubits.is_multiple_of(2) {
        return Err(Error::Configuration(format!("n_qubits must be even and positive, got {n_qubits}")));
    }
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let sites: Vec<[C64; 2]> = (0..n_qubits)
        .map(|i| {
            if family.starts_up(i, n_qubits) {
                [C64::new(c, 0.0), C64::new(s, 0.0)]
            } else {
                [C64::new(-s, 0.0), C64::new(c, 0.0)]
            }
        })
        .collect();
    Ok(StateVector::product(&sites))
}
