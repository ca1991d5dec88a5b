//! Trajectory lengths of evolving quantum states under Petz monotone metrics,
//! and detection of the intrinsic quantum Mpemba effect (crossings of the
//! remaining path length) versus the ordinary one (crossings of the geodesic
//! distance to the steady state).
//!
//! * [`qgeom`]: speeds, fidelity, affinity, geodesic distances.
//! * [`markov`]: single-qubit Lindblad model and its calibration.
//! * [`circuit`]: U(1)-symmetric brick-wall random circuits.
//! * [`analysis`]: crossing detection and Mpemba verdicts.

pub mod analysis;
pub mod circuit;
pub mod error;
pub mod markov;
pub mod qgeom;

pub use error::{Error, Result};
pub use qgeom::{BlochVector, DensityMatrix, MetricKind, TangentOperator};
