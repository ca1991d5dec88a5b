//! U(1)-symmetric brick-wall random circuits on a periodic chain.

mod ensemble;
mod gate;
mod state;

pub use ensemble::{
    apply_step, average_curves, convergence_check, equilibrium_rdm, gibbs_rdm, run_ensemble, run_trajectory,
    AveragedCurve, CircuitConfig, Ensemble, Equilibrium, Subsystem, TrajectoryRun, CONVERGENCE_SLOPE_TOL,
    CONVERGENCE_WINDOW, DEFAULT_HORIZON, DEFAULT_QUBITS, DEFAULT_TRAJECTORIES,
};
pub use gate::{gate_rng, haar_2x2, haar_phase, haar_unitary, sample_gate, SymGate};
pub use state::{apply_gate, initial_state, reduce, QubitRange, StateFamily, StateVector};
