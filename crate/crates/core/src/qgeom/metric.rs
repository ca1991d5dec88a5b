use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::state::{BlochVector, DensityMatrix, TangentOperator};
use crate::error::{Error, Result};

/// Pairs with `p_i + p_j` at or below this floor are excluded from the speed sum.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Minimum eigenvalue required by the harmonic-mean metric.
pub const HM_MIN_EIGENVALUE: f64 = 1e-9;

/// Choice of matrix-monotone function `f` in the Petz family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    /// Bures metric, `f(x) = (x + 1) / 2`.
    Sld,
    /// Harmonic mean, `f(x) = 2x / (x + 1)`.
    Hm,
    /// Wigner-Yanase, `f(x) = (1 + sqrt x)^2 / 4`.
    Wy,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [MetricKind::Sld, MetricKind::Hm, MetricKind::Wy];

    /// The monotone function `f` itself.
    pub fn monotone_fn(self, x: f64) -> f64 {
        match self {
            MetricKind::Sld => (x + 1.0) / 2.0,
            MetricKind::Hm => 2.0 * x / (x + 1.0),
            MetricKind::Wy => (1.0 + x.sqrt()).powi(2) / 4.0,
        }
    }

    /// Weight `1 / (p_j f(p_i / p_j))` multiplying `|<i|X|j>|^2`.
    pub fn weight(self, pi: f64, pj: f64) -> f64 {
        match self {
            MetricKind::Sld => 2.0 / (pi + pj),
            MetricKind::Hm => (pi + pj) / (2.0 * pi * pj),
            MetricKind::Wy => 4.0 / (pi.sqrt() + pj.sqrt()).powi(2),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Sld => "sld",
            MetricKind::Hm => "hm",
            MetricKind::Wy => "wy",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sld" | "bures" => Ok(MetricKind::Sld),
            "hm" => Ok(MetricKind::Hm),
            "wy" => Ok(MetricKind::Wy),
            other => Err(Error::Configuration(format!("unknown metric '{other}'"))),
        }
    }
}

/// Squared speed `D(rho, X)` of the tangent `X` at `rho` under the chosen metric.
pub fn petz_speed(rho: &DensityMatrix, xdot: &TangentOperator, metric: MetricKind) -> Result<f64> {
    if rho.dim() != xdot.dim() {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: xdot.dim() });
    }
    let p = rho.eigenvalues();
    if metric == MetricKind::Hm {
        let min = p.last().copied().unwrap_or(0.0);
        if min < HM_MIN_EIGENVALUE {
            return Err(Error::Domain(format!(
                "HM metric requires min eigenvalue >= {HM_MIN_EIGENVALUE:e}, got {min:e}"
            )));
        }
    }
    let v = rho.eigenvectors();
    let x_eig = v.adjoint() * xdot.entries() * v;
    let n = p.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if p[i] + p[j] <= EIGEN_FLOOR {
                continue;
            }
            let c: C64 = x_eig[(i, j)];
            total += c.norm_sqr() * metric.weight(p[i], p[j]);
        }
    }
    Ok(total.max(0.0))
}

/// Closed-form qubit speed from the Bloch vector and its rate of change.
///
/// With `a` the component of `rdot` along `r` and `b` the perpendicular
/// magnitude: SLD gives `a^2/(1-r^2) + b^2`, HM gives `(a^2+b^2)/(1-r^2)` and
/// WY gives `a^2/(1-r^2) + 2 b^2 / (1 + sqrt(1-r^2))`.
pub fn qubit_speed_closed_form(r: BlochVector, rdot: [f64; 3], metric: MetricKind) -> Result<f64> {
    let r2 = r.norm_sqr();
    if r2 >= 1.0 {
        return Err(Error::Domain(format!("closed-form qubit speed needs |r| < 1, got {}", r2.sqrt())));
    }
    let v2 = rdot.iter().map(|c| c * c).sum::<f64>();
    let (a2, b2) = if r2 == 0.0 {
        (0.0, v2)
    } else {
        let a = r.dot(rdot);
        let a2 = a * a / r2;
        (a2, (v2 - a2).max(0.0))
    };
    let purity_gap = 1.0 - r2;
    Ok(match metric {
        MetricKind::Sld => a2 / purity_gap + b2,
        MetricKind::Hm => (a2 + b2) / purity_gap,
        MetricKind::Wy => a2 / purity_gap + 2.0 * b2 / (1.0 + purity_gap.sqrt()),
    })
}
