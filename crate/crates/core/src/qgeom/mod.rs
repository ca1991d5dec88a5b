//! Information geometry on finite-dimensional density matrices: Petz
//! monotone metric speeds, Uhlmann fidelity, affinity and geodesic distances.

mod distance;
mod metric;
mod state;

pub use distance::{affinity, general_fidelity, geodesic_distance, uhlmann_fidelity};
pub use metric::{petz_speed, qubit_speed_closed_form, MetricKind, EIGEN_FLOOR, HM_MIN_EIGENVALUE};
pub use state::{
    bloch_to_density, density_to_bloch, spectral_decompose, BlochVector, CMatrix, DensityMatrix, TangentOperator,
    STATE_TOL,
};
