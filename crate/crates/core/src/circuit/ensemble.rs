use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gate::{gate_rng, sample_gate};
use super::state::{initial_state, reduce, QubitRange, StateFamily, StateVector};
use crate::error::{Error, Result};
use crate::qgeom::{geodesic_distance, CMatrix, DensityMatrix, MetricKind};

pub const DEFAULT_QUBITS: usize = 16;
pub const DEFAULT_HORIZON: usize = 20;
pub const DEFAULT_TRAJECTORIES: usize = 10_000;
pub const CONVERGENCE_WINDOW: usize = 5;
pub const CONVERGENCE_SLOPE_TOL: f64 = 0.005;

/// Size of the observed block `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subsystem {
    Single,
    Quarter,
}

impl Subsystem {
    pub fn len(self, n_qubits: usize) -> usize {
        match self {
            Subsystem::Single => 1,
            Subsystem::Quarter => n_qubits / 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Subsystem::Single => "1",
            Subsystem::Quarter => "quarter",
        }
    }
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subsystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1" | "single" => Ok(Subsystem::Single),
            "quarter" | "n/4" => Ok(Subsystem::Quarter),
            other => Err(Error::Configuration(format!("unknown subsystem '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitConfig {
    pub n_qubits: usize,
    pub theta: f64,
    pub family: StateFamily,
    pub subsystem: Subsystem,
    /// First qubit of `M`.
    pub subsystem_start: usize,
    pub metric: MetricKind,
    pub horizon: usize,
    pub n_trajectories: usize,
    pub master_seed: u64,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        Self {
            n_qubits: DEFAULT_QUBITS,
            theta: std::f64::consts::FRAC_PI_2,
            family: StateFamily::Neel,
            subsystem: Subsystem::Single,
            subsystem_start: 0,
            metric: MetricKind::Sld,
            horizon: DEFAULT_HORIZON,
            n_trajectories: DEFAULT_TRAJECTORIES,
            master_seed: 0,
        }
    }
}

impl CircuitConfig {
    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits;
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::Configuration(format!("n_qubits must be even and at least 2, got {n}")));
        }
        if n > 24 {
            return Err(Error::Configuration(format!("n_qubits = {n} is beyond the statevector budget")));
        }
        if self.subsystem == Subsystem::Quarter && !n.is_multiple_of(4) {
            return Err(Error::Configuration(format!("quarter subsystem needs n_qubits divisible by 4, got {n}")));
        }
        if self.horizon < 1 {
            return Err(Error::Configuration("horizon must be at least 1".into()));
        }
        if !self.theta.is_finite() {
            return Err(Error::Configuration(format!("theta = {}", self.theta)));
        }
        if self.subsystem_start + self.subsystem.len(n) > n {
            return Err(Error::Configuration(format!(
                "subsystem starting at {} does not fit in {n} qubits",
                self.subsystem_start
            )));
        }
        if self.metric == MetricKind::Hm {
            return Err(Error::UnsupportedMetric(MetricKind::Hm));
        }
        Ok(())
    }

    pub fn range(&self) -> QubitRange {
        QubitRange::new(self.subsystem_start, self.subsystem.len(self.n_qubits))
    }
}

/// Applies one time step (even layer, then odd layer) in place.
pub fn apply_step(psi: &mut StateVector, master_seed: u64, trajectory: u64, step: usize) -> Result<()> {
    let n = psi.n_qubits();
    for layer in 0..2 {
        let layer_id = (2 * step + layer) as u64;
        for i in 0..n / 2 {
            let qa = 2 * i + layer;
            let qb = (qa + 1) % n;
            let gate = sample_gate(&mut gate_rng(master_seed, trajectory, layer_id, i as u64));
            psi.apply_gate(&gate, qa, qb)?;
        }
    }
    Ok(())
}

/// Per-step reduced states `rho_M(t_0..t_horizon)` and the discretized length
/// `ell(t_j) = 1/2 sum_{i<j} D(rho_M(t_{i+1}), rho_M(t_i))`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRun {
    pub rdms: Vec<DensityMatrix>,
    pub ell: Vec<f64>,
}

fn simulate<F>(config: &CircuitConfig, traj_index: u64, mut visit: F) -> Result<Vec<f64>>
where
    F: FnMut(usize, &DensityMatrix),
{
    config.validate()?;
    let range = config.range();
    let mut psi = initial_state(config.family, config.theta, config.n_qubits)?;
    let mut prev = reduce(&psi, range)?;
    visit(0, &prev);
    let mut ell = Vec::with_capacity(config.horizon + 1);
    ell.push(0.0);
    let mut acc = 0.0;
    for step in 0..config.horizon {
        apply_step(&mut psi, config.master_seed, traj_index, step)?;
        let rho = reduce(&psi, range)?;
        acc += 0.5 * geodesic_distance(&rho, &prev, config.metric)?;
        ell.push(acc);
        visit(step + 1, &rho);
        prev = rho;
    }
    Ok(ell)
}

pub fn run_trajectory(config: &CircuitConfig, traj_index: u64) -> Result<TrajectoryRun> {
    let mut rdms = Vec::with_capacity(config.horizon + 1);
    let ell = simulate(config, traj_index, |_, rho| rdms.push(rho.clone()))?;
    Ok(TrajectoryRun { rdms, ell })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedCurve {
    pub times: Vec<usize>,
    pub mean_ell: Vec<f64>,
    pub std_err: Vec<f64>,
    /// `L = mean_ell(horizon)`
    pub mean_total: f64,
    pub residue: Vec<f64>,
    /// Standard error of the per-trajectory residue `l(horizon) - l(t_j)`.
    pub residue_std_err: Vec<f64>,
    pub converged: bool,
}

impl AveragedCurve {
    /// Builds the curve from per-trajectory `ell` rows, reduced in row order.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::Configuration(format!("need at least 2 trajectories, got {n}")));
        }
        let len = rows[0].len();
        if rows.iter().any(|r| r.len() != len) {
            return Err(Error::LengthMismatch("trajectory rows differ in length".into()));
        }
        let mut mean_ell = vec![0.0; len];
        for row in rows {
            for (m, v) in mean_ell.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean_ell.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = vec![0.0; len];
        for row in rows {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean_ell) {
                *s += (v - m).powi(2);
            }
        }
        let se = |sum_sq: f64| (sum_sq / (n - 1) as f64).sqrt() / (n as f64).sqrt();
        let std_err: Vec<f64> = var.iter().map(|&s| se(s)).collect();
        let mean_total = *mean_ell.last().unwrap_or(&0.0);
        let residue: Vec<f64> = mean_ell.iter().map(|m| mean_total - m).collect();
        let mut res_var = vec![0.0; len];
        for row in rows {
            let total = row[len - 1];
            for ((s, v), r) in res_var.iter_mut().zip(row).zip(&residue) {
                *s += (total - v - r).powi(2);
            }
        }
        let residue_std_err = res_var.iter().map(|&s| se(s)).collect();
        let mut curve = Self {
            times: (0..len).collect(),
            mean_ell,
            std_err,
            mean_total,
            residue,
            residue_std_err,
            converged: false,
        };
        curve.converged = convergence_check(&curve, CONVERGENCE_WINDOW, CONVERGENCE_SLOPE_TOL);
        Ok(curve)
    }
}

/// Ensemble statistics beyond the length curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub curve: AveragedCurve,
    /// Trajectory average of `rho_M(horizon)`.
    pub mean_final_rdm: DensityMatrix,
    /// Equilibrium reduced state for the initial charge density.
    pub equilibrium: DensityMatrix,
    /// Per-trajectory SLD geodesic distance of `rho_M(horizon)` from
    /// `equilibrium`: mean and standard error.
    pub final_distance_mean: f64,
    pub final_distance_std_err: f64,
}

impl Ensemble {
    /// SLD geodesic distance from the averaged final state to `equilibrium`.
    pub fn averaged_state_distance(&self) -> Result<f64> {
        geodesic_distance(&self.mean_final_rdm, &self.equilibrium, MetricKind::Sld)
    }
}

/// Runs every trajectory in parallel and reduces in trajectory order, so the
/// result does not depend on the thread count.
pub fn run_ensemble(config: &CircuitConfig) -> Result<Ensemble> {
    config.validate()?;
    if config.n_trajectories < 2 {
        return Err(Error::Configuration(format!("need at least 2 trajectories, got {}", config.n_trajectories)));
    }
    let psi0 = initial_state(config.family, config.theta, config.n_qubits)?;
    let density = psi0.charge() / config.n_qubits as f64;
    let equilibrium = gibbs_rdm(density, config.range().len)?;
    let horizon = config.horizon;

    let runs: Vec<(Vec<f64>, DensityMatrix, f64)> = (0..config.n_trajectories as u64)
        .into_par_iter()
        .map(|idx| {
            let mut last = None;
            let ell = simulate(config, idx, |step, rho| {
                if step == horizon {
                    last = Some(rho.clone());
                }
            })?;
            let last = last.expect("horizon >= 1");
            let dist = geodesic_distance(&last, &equilibrium, MetricKind::Sld)?;
            Ok((ell, last, dist))
        })
        .collect::<Result<_>>()?;

    let n = runs.len() as f64;
    let dim = equilibrium.dim();
    let mut mean_rho = CMatrix::zeros(dim, dim);
    let mut dist_sum = 0.0;
    for (_, rho, d) in &runs {
        mean_rho += rho.entries();
        dist_sum += d;
    }
    mean_rho /= C64::new(n, 0.0);
    let final_distance_mean = dist_sum / n;
    let dist_var = runs.iter().map(|(_, _, d)| (d - final_distance_mean).powi(2)).sum::<f64>() / (n - 1.0);
    let rows: Vec<Vec<f64>> = runs.into_iter().map(|(ell, _, _)| ell).collect();
    Ok(Ensemble {
        curve: AveragedCurve::from_rows(&rows)?,
        mean_final_rdm: DensityMatrix::new(mean_rho)?,
        equilibrium,
        final_distance_mean,
        final_distance_std_err: (dist_var / n).sqrt(),
    })
}

pub fn average_curves(config: &CircuitConfig) -> Result<AveragedCurve> {
    Ok(run_ensemble(config)?.curve)
}

/// Product of single-site Gibbs states with `<sigma_z> = magnetization`.
pub fn gibbs_rdm(magnetization: f64, subsystem_size: usize) -> Result<DensityMatrix> {
    if subsystem_size == 0 || subsystem_size > 12 {
        return Err(Error::Configuration(format!("subsystem size {subsystem_size}")));
    }
    if !(-1.0 - 1e-12..=1.0 + 1e-12).contains(&magnetization) {
        return Err(Error::Domain(format!("magnetization {magnetization} outside [-1, 1]")));
    }
    let m = magnetization.clamp(-1.0, 1.0);
    let site = [(1.0 + m) / 2.0, (1.0 - m) / 2.0];
    let diag: Vec<f64> = (0..1usize << subsystem_size)
        .map(|k| (0..subsystem_size).map(|j| site[(k >> j) & 1]).product())
        .collect();
    let total: f64 = diag.iter().sum();
    let entries = CMatrix::from_diagonal(&DVector::from_iterator(
        diag.len(),
        diag.iter().map(|p| C64::new(p / total, 0.0)),
    ));
    DensityMatrix::new(entries)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub rdm: DensityMatrix,
    /// `lambda = artanh(-cos theta)`; infinite at `theta = 0`.
    pub lambda: f64,
    /// Set when `lambda` diverges and `rdm` is the all-up projector.
    pub divergent: bool,
}

/// Reduced equilibrium state `exp(-lambda sigma_z)^{(x) k} / Z` with
/// `tanh lambda = -cos theta`.
pub fn equilibrium_rdm(theta: f64, subsystem_size: usize) -> Result<Equilibrium> {
    if !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&theta) {
        return Err(Error::Domain(format!("theta = {theta} outside [0, pi/2]")));
    }
    let m = theta.cos();
    let divergent = m >= 1.0;
    let lambda = if divergent { f64::NEG_INFINITY } else { (-m).atanh() };
    Ok(Equilibrium { rdm: gibbs_rdm(m, subsystem_size)?, lambda, divergent })
}

/// True when the least-squares slope of `mean_ell` over the last `window`
/// steps is at most `slope_tol` per step.
pub fn convergence_check(curve: &AveragedCurve, window: usize, slope_tol: f64) -> bool {
    let len = curve.mean_ell.len();
    let k = (window + 1).min(len);
    if k < 2 {
        return true;
    }
    let xs: Vec<f64> = curve.times[len - k..].iter().map(|&t| t as f64).collect();
    let ys = &curve.mean_ell[len - k..];
    let mx = xs.iter().sum::<f64>() / k as f64;
    let my = ys.iter().sum::<f64>() / k as f64;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx <= slope_tol
}
