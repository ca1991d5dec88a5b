use super::metric::MetricKind;
use super::state::{hermitian_eigen, DensityMatrix};
use crate::error::{Error, Result};

fn check_dims(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: sigma.dim() });
    }
    Ok(())
}

/// Uhlmann fidelity `Tr sqrt(sqrt(rho) sigma sqrt(rho))`, clamped to `[0, 1]`.
///
/// Qubits use `sqrt(Tr(rho sigma) + 2 sqrt(det rho det sigma))`.
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    if rho.dim() == 2 {
        Ok(qubit_fidelity(rho, sigma))
    } else {
        Ok(general_fidelity(rho, sigma))
    }
}

fn qubit_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let overlap = (rho.entries().component_mul(&sigma.entries().transpose())).sum().re;
    let dets = (rho.determinant() * sigma.determinant()).max(0.0);
    (overlap + 2.0 * dets.sqrt()).max(0.0).sqrt().clamp(0.0, 1.0)
}

/// Matrix-square-root route to the fidelity, for any dimension.
pub fn general_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let root = rho.sqrt();
    let inner = &root * sigma.entries() * &root;
    let (values, _) = hermitian_eigen(&inner);
    values.iter().map(|&p| p.max(0.0).sqrt()).sum::<f64>().clamp(0.0, 1.0)
}

/// Quantum affinity `Tr(sqrt(rho) sqrt(sigma))`, clamped to `[0, 1]`.
pub fn affinity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    let a = rho.sqrt();
    let b = sigma.sqrt();
    // Tr(AB) = sum_ij A_ij B_ji
    let value = a.component_mul(&b.transpose()).sum().re;
    Ok(value.clamp(0.0, 1.0))
}

/// Geodesic distance `2 arccos F` (SLD) or `2 arccos A` (WY).
pub fn geodesic_distance(rho: &DensityMatrix, sigma: &DensityMatrix, metric: MetricKind) -> Result<f64> {
    let overlap = match metric {
        MetricKind::Sld => uhlmann_fidelity(rho, sigma)?,
        MetricKind::Wy => affinity(rho, sigma)?,
        MetricKind::Hm => return Err(Error::UnsupportedMetric(metric)),
    };
    Ok(2.0 * overlap.clamp(0.0, 1.0).acos())
}
