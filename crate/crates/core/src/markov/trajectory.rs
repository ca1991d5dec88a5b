use serde::{Deserialize, Serialize};

use super::model::{integrate_with, steady_state, MarkovParams, QubitLindblad};
use crate::error::{Error, Result};
use crate::qgeom::{qubit_speed_closed_form, BlochVector, MetricKind};

/// A sampled trajectory with its length, residue and distance-to-steady curves.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<BlochVector>,
    /// `l(t)`, the arc length travelled so far.
    pub ell: Vec<f64>,
    /// `d(t) = arccos F(rho(t), rho_steady)`.
    pub geo: Vec<f64>,
    /// `L = l(tau_max)`.
    pub total_length: f64,
    /// `R(t) = L - l(t)`.
    pub residue: Vec<f64>,
    pub metric: MetricKind,
    pub params: MarkovParams,
}

impl TrajectoryRecord {
    /// Integrates from `r0` and fills in every curve. `ell` is accumulated
    /// over all integrator samples, including bisected sub-steps, and stored
    /// on the uniform grid.
    pub fn simulate(r0: BlochVector, params: &MarkovParams, metric: MetricKind, n_steps: usize, tau_max: f64) -> Result<Self> {
        let mut times = Vec::new();
        let mut states = Vec::new();
        let mut ell = Vec::new();
        walk_length(r0, params, metric, n_steps, tau_max, |t, r, l| {
            times.push(t);
            states.push(r);
            ell.push(l);
        })?;
        let geo = geodesic_curve(&states, params)?;
        let total_length = *ell.last().unwrap_or(&0.0);
        let residue = ell.iter().map(|l| total_length - l).collect();
        Ok(Self { times, states, ell, geo, total_length, residue, metric, params: *params })
    }

    pub fn initial_distance(&self) -> f64 {
        self.geo[0]
    }
}

/// Instantaneous speed `sqrt(D(rho, d rho / dtau))` at a Bloch point.
pub fn instantaneous_speed(g: &QubitLindblad, r: BlochVector, metric: MetricKind) -> Result<f64> {
    let rate = g.rhs(r.as_array());
    Ok(qubit_speed_closed_form(r, rate, metric)?.sqrt())
}

/// Composite-trapezoid `l(t) = 1/2 * int sqrt(D) dt` on the given samples,
/// with the speed taken from the analytic right-hand side.
pub fn trajectory_length(states: &[BlochVector], times: &[f64], metric: MetricKind, params: &MarkovParams) -> Result<Vec<f64>> {
    if states.len() != times.len() {
        return Err(Error::LengthMismatch(format!("{} states vs {} times", states.len(), times.len())));
    }
    let g = params.generator()?;
    let mut ell = Vec::with_capacity(states.len());
    let mut acc = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for (&t, &r) in times.iter().zip(states) {
        let v = instantaneous_speed(&g, r, metric)?;
        if let Some((tp, vp)) = prev {
            acc += 0.25 * (t - tp) * (v + vp);
        }
        ell.push(acc);
        prev = Some((t, v));
    }
    Ok(ell)
}

/// `d(t) = arccos F(rho(t), rho_steady)` for every sample.
pub fn geodesic_curve(states: &[BlochVector], params: &MarkovParams) -> Result<Vec<f64>> {
    let ss = steady_state(params)?;
    Ok(states.iter().map(|s| s.fidelity(&ss).acos()).collect())
}

/// Runs the integrator and accumulates the trapezoid of `1/2 sqrt(D)` over
/// every sample, calling `visit(tau, state, ell)` on grid samples.
fn walk_length(
    r0: BlochVector,
    params: &MarkovParams,
    metric: MetricKind,
    n_steps: usize,
    tau_max: f64,
    mut visit: impl FnMut(f64, BlochVector, f64),
) -> Result<()> {
    let g = params.generator()?;
    let mut acc = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    let mut err = None;
    integrate_with(r0, &g, n_steps, tau_max, |t, r, on_grid| {
        if err.is_some() {
            return;
        }
        match instantaneous_speed(&g, r, metric) {
            Ok(v) => {
                if let Some((tp, vp)) = prev {
                    acc += 0.25 * (t - tp) * (v + vp);
                }
                prev = Some((t, v));
                if on_grid {
                    visit(t, r, acc);
                }
            }
            Err(e) => err = Some(e),
        }
    })?;
    err.map_or(Ok(()), Err)
}

/// `(L, d(0))` without storing the samples.
pub fn total_length_and_distance(
    r0: BlochVector,
    params: &MarkovParams,
    metric: MetricKind,
    n_steps: usize,
    tau_max: f64,
) -> Result<(f64, f64)> {
    let ss = steady_state(params)?;
    let mut total = 0.0;
    walk_length(r0, params, metric, n_steps, tau_max, |_, _, l| total = l)?;
    Ok((total, r0.fidelity(&ss).acos()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::model::{HamiltonianScale, ModelInterpretation, RateRule};
    use approx::assert_abs_diff_eq;

    fn params() -> MarkovParams {
        let it = ModelInterpretation {
            rate_rule: RateRule::Magnitude,
            rotation_sign: 1,
            decay_pole: -1,
            hamiltonian_scale: HamiltonianScale::Inverse,
        };
        MarkovParams::new(0.6, 0.94, it).unwrap()
    }

    #[test]
    fn constant_trajectory_has_zero_length() {
        let p = params();
        let ss = steady_state(&p).unwrap();
        let rec = TrajectoryRecord::simulate(ss, &p, MetricKind::Sld, 500, 10.0).unwrap();
        assert!(rec.ell.iter().all(|&l| l.abs() < 1e-12));
        assert!(rec.geo.iter().all(|&d| d.abs() < 1e-6));
    }

    #[test]
    fn diameter_path_matches_arcsine_length() {
        // Straight path along z: l = 1/2 * int dz / sqrt(1 - z^2)
        let states: Vec<_> = (0..=20000).map(|k| BlochVector::new(0.0, 0.0, 0.99 - 1.98 * k as f64 / 20000.0)).collect();
        let times: Vec<_> = (0..=20000).map(|k| k as f64 / 20000.0).collect();
        // constant velocity dz/dt = -1.98, speed from closed form
        let mut acc = 0.0;
        for w in states.windows(2) {
            let v0 = qubit_speed_closed_form(w[0], [0.0, 0.0, -1.98], MetricKind::Sld).unwrap().sqrt();
            let v1 = qubit_speed_closed_form(w[1], [0.0, 0.0, -1.98], MetricKind::Sld).unwrap().sqrt();
            acc += 0.25 * (v0 + v1) / 20000.0;
        }
        let exact = 0.99_f64.asin();
        assert_abs_diff_eq!(acc, exact, epsilon = 1e-4);
        assert_eq!(times.len(), states.len());
    }

    #[test]
    fn record_invariants() {
        let p = params();
        let rec = TrajectoryRecord::simulate(BlochVector::yz(0.5, 0.3), &p, MetricKind::Sld, 1000, 30.0).unwrap();
        assert!(rec.ell.windows(2).all(|w| w[1] >= w[0]));
        assert!(rec.residue.windows(2).all(|w| w[1] <= w[0]));
        assert!(*rec.residue.last().unwrap() >= -1e-6);
        assert!(*rec.geo.last().unwrap() <= 0.01);
        assert!(rec.total_length >= rec.initial_distance() - 1e-6);
        let (l, d0) = total_length_and_distance(BlochVector::yz(0.5, 0.3), &p, MetricKind::Sld, 1000, 30.0).unwrap();
        assert_eq!(l, rec.total_length);
        assert_eq!(d0, rec.initial_distance());
    }

    #[test]
    fn x_offset_does_not_change_yz_sequence() {
        let p = params();
        let a = super::super::integrate(BlochVector::new(0.3, 0.2, -0.4), &p, 1000, 30.0).unwrap();
        let b = super::super::integrate(BlochVector::new(0.0, 0.2, -0.4), &p, 1000, 30.0).unwrap();
        for (sa, sb) in a.states.iter().zip(&b.states) {
            assert!((sa.y - sb.y).abs() < 1e-10 && (sa.z - sb.z).abs() < 1e-10);
        }
    }
}
