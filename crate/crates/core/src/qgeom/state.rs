use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;

/// Hermiticity, trace and eigenvalue-floor tolerance applied on construction.
pub const STATE_TOL: f64 = 1e-10;

fn max_antihermitian(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order. Columns of the returned matrix are the eigenvectors.
pub(crate) fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let eig = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// `V diag(f(p)) V†` for a decomposed Hermitian matrix.
pub(crate) fn spectral_apply(values: &[f64], vectors: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let n = values.len();
    let mut scaled = vectors.clone();
    for (j, &p) in values.iter().enumerate() {
        let w = C64::new(f(p), 0.0);
        for i in 0..n {
            scaled[(i, j)] *= w;
        }
    }
    scaled * vectors.adjoint()
}

/// A validated density matrix together with its spectral decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl DensityMatrix {
    /// Validates `entries` and clips small negative eigenvalues to zero.
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::InvalidState(format!(
                "density matrix must be square and non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let skew = max_antihermitian(&entries);
        if skew > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian: max |rho_ij - conj(rho_ji)| = {skew:e}")));
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > STATE_TOL || trace.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {trace} != 1")));
        }
        let (mut eigenvalues, eigenvectors) = hermitian_eigen(&entries);
        let min = eigenvalues.last().copied().unwrap_or(0.0);
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        let clipped = min < 0.0;
        for p in eigenvalues.iter_mut() {
            *p = p.clamp(0.0, 1.0);
        }
        let entries = if clipped {
            spectral_apply(&eigenvalues, &eigenvectors, |p| p)
        } else {
            hermitize(&entries)
        };
        Ok(Self { entries, eigenvalues, eigenvectors })
    }

    /// Diagonal density matrix from a probability vector.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        let n = probs.len();
        Self::new(CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(probs[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    /// `|psi><psi|` for a normalized vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let n = psi.len();
        Self::new(CMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj()))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let p = 1.0 / dim as f64;
        Self {
            entries: CMatrix::identity(dim, dim) * C64::new(p, 0.0),
            eigenvalues: vec![p; dim],
            eigenvectors: CMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// Eigenvalues in descending order, clipped to `[0, 1]`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn sqrt(&self) -> CMatrix {
        spectral_apply(&self.eigenvalues, &self.eigenvectors, f64::sqrt)
    }

    pub fn determinant(&self) -> f64 {
        self.eigenvalues.iter().product()
    }

    /// `(1 - p) rho + p I / dim`.
    pub fn depolarize(&self, p: f64) -> Result<Self> {
        let dim = self.dim();
        let mixed = CMatrix::identity(dim, dim) * C64::new(p / dim as f64, 0.0);
        Self::new(&self.entries * C64::new(1.0 - p, 0.0) + mixed)
    }
}

/// Returns eigenvalues (descending, clipped to `[0, 1]`) and orthonormal eigenvector columns.
pub fn spectral_decompose(rho: &DensityMatrix) -> (Vec<f64>, CMatrix) {
    (rho.eigenvalues.clone(), rho.eigenvectors.clone())
}

/// Hermitian, traceless direction `d rho / dt`.
#[derive(Debug, Clone)]
pub struct TangentOperator {
    entries: CMatrix,
}

impl TangentOperator {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::InvalidState("tangent operator must be square".into()));
        }
        let skew = max_antihermitian(&entries);
        if skew > STATE_TOL {
            return Err(Error::InvalidState(format!("tangent not Hermitian: {skew:e}")));
        }
        let tr = entries.trace();
        if tr.norm() > STATE_TOL {
            return Err(Error::InvalidState(format!("tangent trace {tr} != 0")));
        }
        Ok(Self { entries: hermitize(&entries) })
    }

    /// `(rdot . sigma) / 2` for a qubit.
    pub fn from_bloch_rate(rdot: [f64; 3]) -> Self {
        Self { entries: pauli_combination(0.0, rdot) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }
}

/// `(c I + r . sigma) / 2`.
fn pauli_combination(c: f64, r: [f64; 3]) -> CMatrix {
    let [x, y, z] = r;
    CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new((c + z) / 2.0, 0.0),
            C64::new(x / 2.0, -y / 2.0),
            C64::new(x / 2.0, y / 2.0),
            C64::new((c - z) / 2.0, 0.0),
        ],
    )
}

/// Bloch vector of a single-qubit state.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const ORIGIN: Self = Self { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// A point in the `x = 0` plane.
    pub fn yz(y: f64, z: f64) -> Self {
        Self { x: 0.0, y, z }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn dot(&self, v: [f64; 3]) -> f64 {
        self.x * v[0] + self.y * v[1] + self.z * v[2]
    }

    /// Uhlmann fidelity between two qubit states given by Bloch vectors.
    pub fn fidelity(&self, other: &BlochVector) -> f64 {
        let overlap = (1.0 + self.dot(other.as_array())) / 2.0;
        let dets = ((1.0 - self.norm_sqr()).max(0.0) * (1.0 - other.norm_sqr()).max(0.0)).sqrt() / 2.0;
        (overlap + dets).max(0.0).sqrt().clamp(0.0, 1.0)
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        let n = self.norm();
        if n > 1.0 + 1e-12 {
            return Err(Error::Domain(format!("Bloch vector norm {n} > 1")));
        }
        // Fast path: eigen-data is known in closed form.
        let entries = pauli_combination(1.0, self.as_array());
        let r = n.min(1.0);
        let eigenvalues = vec![(1.0 + r) / 2.0, (1.0 - r) / 2.0];
        let eigenvectors = if r < 1e-300 {
            CMatrix::identity(2, 2)
        } else {
            let (ux, uy, uz) = (self.x / n, self.y / n, self.z / n);
            // |+n> and |-n> for direction (ux, uy, uz)
            let up = bloch_eigvec(ux, uy, uz);
            let down = bloch_eigvec(-ux, -uy, -uz);
            CMatrix::from_column_slice(2, 2, &[up[0], up[1], down[0], down[1]])
        };
        Ok(DensityMatrix { entries, eigenvalues, eigenvectors })
    }

    pub fn from_density(rho: &DensityMatrix) -> Result<Self> {
        if rho.dim() != 2 {
            return Err(Error::DimensionMismatch { left: rho.dim(), right: 2 });
        }
        let m = rho.entries();
        Ok(Self {
            x: 2.0 * m[(1, 0)].re,
            y: 2.0 * m[(1, 0)].im,
            z: (m[(0, 0)] - m[(1, 1)]).re,
        })
    }
}

/// Normalized eigenvector of `n . sigma` with eigenvalue +1.
fn bloch_eigvec(ux: f64, uy: f64, uz: f64) -> [C64; 2] {
    if uz > -1.0 + 1e-12 {
        let a = ((1.0 + uz) / 2.0).sqrt();
        let scale = 1.0 / (2.0 * a);
        [C64::new(a, 0.0), C64::new(ux * scale, uy * scale)]
    } else {
        [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
    }
}

pub fn bloch_to_density(r: BlochVector) -> Result<DensityMatrix> {
    r.to_density()
}

pub fn density_to_bloch(rho: &DensityMatrix) -> Result<BlochVector> {
    BlochVector::from_density(rho)
}
