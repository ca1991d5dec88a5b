//! Single-qubit Lindblad dynamics in Bloch form: integration, trajectory
//! lengths, distances to the steady state, calibration of the model
//! normalization and distance maps over the `x = 0` disk.

mod calibrate;
mod map;
mod model;
mod trajectory;

pub use calibrate::{
    calibrate, evaluate_candidate, evaluate_case, reference_anchors, reference_case, score_candidates, AnchorCase, AnchorQuantity,
    AnchorResidual, CalibrationReport, CandidateResult, CaseLabel, CALIBRATION_FAIL_THRESHOLD, CALIBRATION_TARGET,
    REFERENCE_ALPHA,
};
pub use map::{disk_grid, distance_map, distance_map_on, map_cell, MapCell, DEFAULT_SPACING, SPEED_CLIP};
pub use model::{
    bloch_rhs, effective_steps, integrate, matrix_rhs, steady_state, HamiltonianScale, MarkovParams,
    ModelInterpretation, QubitLindblad, RateRule, Trajectory, DEFAULT_STEPS, DEFAULT_TAU_MAX, MAX_STEP_STIFFNESS,
};
pub use trajectory::{
    geodesic_curve, instantaneous_speed, total_length_and_distance, trajectory_length, TrajectoryRecord,
};
