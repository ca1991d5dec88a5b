use thiserror::Error;

use crate::markov::CalibrationReport;
use crate::qgeom::MetricKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("metric {0} has no closed-form geodesic distance")]
    UnsupportedMetric(MetricKind),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("unphysical interpretation: steady state |r| = {norm:.6} > 1")]
    Unphysical { norm: f64 },

    #[error("numerical instability at step {step}: |r| = {norm:.9}")]
    Instability { step: usize, norm: f64 },

    #[error("calibration failed: best max deviation {:.4} exceeds {:.2}", .0.best().max_deviation, crate::markov::CALIBRATION_FAIL_THRESHOLD)]
    Calibration(Box<CalibrationReport>),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    IndexOutOfRange { index: usize, n_qubits: usize },
}
