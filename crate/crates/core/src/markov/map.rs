use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{MarkovParams, DEFAULT_STEPS, DEFAULT_TAU_MAX};
use super::trajectory::{instantaneous_speed, total_length_and_distance};
use crate::error::Result;
use crate::qgeom::{BlochVector, MetricKind};

pub const DEFAULT_SPACING: f64 = 0.02;
/// Clip level used when exporting speed samples.
pub const SPEED_CLIP: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapCell {
    pub y: f64,
    pub z: f64,
    pub length: f64,
    pub distance: f64,
    /// Instantaneous speed `sqrt(D)` at the cell itself.
    pub speed: f64,
}

impl MapCell {
    /// `L - d(0)`
    pub fn excess(&self) -> f64 {
        self.length - self.distance
    }

    pub fn clipped_speed(&self) -> f64 {
        self.speed.min(SPEED_CLIP)
    }
}

/// Grid points `(j * spacing, k * spacing)` strictly inside the unit disk,
/// ordered by `y` then `z`.
pub fn disk_grid(spacing: f64) -> Vec<(f64, f64)> {
    let half = (1.0 / spacing).round() as i64;
    let mut out = Vec::new();
    for j in -half..=half {
        for k in -half..=half {
            let (y, z) = (j as f64 * spacing, k as f64 * spacing);
            if y * y + z * z < 1.0 - 1e-12 {
                out.push((y, z));
            }
        }
    }
    out
}

/// `(L, d(0), speed)` for one starting point.
pub fn map_cell(params: &MarkovParams, metric: MetricKind, y: f64, z: f64) -> Result<MapCell> {
    let r0 = BlochVector::yz(y, z);
    let (length, distance) = total_length_and_distance(r0, params, metric, DEFAULT_STEPS, DEFAULT_TAU_MAX)?;
    let speed = instantaneous_speed(&params.generator()?, r0, metric)?;
    Ok(MapCell { y, z, length, distance, speed })
}

/// Trajectory length and geodesic distance over the disk interior. Cells are
/// evaluated in parallel and returned in grid order.
pub fn distance_map(params: &MarkovParams, spacing: f64, metric: MetricKind) -> Result<Vec<MapCell>> {
    distance_map_on(params, &disk_grid(spacing), metric)
}

pub fn distance_map_on(params: &MarkovParams, points: &[(f64, f64)], metric: MetricKind) -> Result<Vec<MapCell>> {
    points.par_iter().map(|&(y, z)| map_cell(params, metric, y, z)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::model::{steady_state, HamiltonianScale, ModelInterpretation, RateRule};

    #[test]
    fn grid_is_inside_disk_and_symmetric() {
        let g = disk_grid(0.1);
        assert!(g.iter().all(|(y, z)| y * y + z * z < 1.0));
        assert!(g.contains(&(0.0, 0.0)));
        assert_eq!(g.len() % 2, 1);
    }

    #[test]
    fn steady_state_cell_is_zero() {
        let it = ModelInterpretation {
            rate_rule: RateRule::Percent,
            rotation_sign: 1,
            decay_pole: 1,
            hamiltonian_scale: HamiltonianScale::Inverse,
        };
        let p = MarkovParams::new(50.0, 0.94, it).unwrap();
        let ss = steady_state(&p).unwrap();
        let cell = map_cell(&p, MetricKind::Sld, ss.y, ss.z).unwrap();
        assert!(cell.length.abs() < 1e-9 && cell.distance.abs() < 1e-6);
        let cells = distance_map_on(&p, &disk_grid(0.25), MetricKind::Sld).unwrap();
        assert!(cells.iter().all(|c| c.excess() >= -1e-6));
    }
}
