use iqme::markov::{
    integrate, reference_anchors, score_candidates, steady_state, total_length_and_distance, HamiltonianScale,
    MarkovParams, ModelInterpretation, RateRule, TrajectoryRecord, DEFAULT_STEPS, DEFAULT_TAU_MAX,
};
use iqme::qgeom::CMatrix;
use iqme::{BlochVector, MetricKind};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::sync::OnceLock;

fn selected() -> ModelInterpretation {
    static BEST: OnceLock<ModelInterpretation> = OnceLock::new();
    *BEST.get_or_init(|| score_candidates(&reference_anchors(), &ModelInterpretation::grid()).unwrap().interpretation())
}

fn physical_grid() -> Vec<ModelInterpretation> {
    ModelInterpretation::grid().into_iter().filter(|i| i.rate_rule != RateRule::Literal).collect()
}

fn interior(max_radius: f64) -> impl Strategy<Value = BlochVector> {
    (0.0..max_radius, 0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU).prop_map(|(r, th, ph)| {
        BlochVector::new(r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos())
    })
}

fn disk_point(max_radius: f64) -> impl Strategy<Value = BlochVector> {
    (0.0..max_radius, 0.0..std::f64::consts::TAU).prop_map(|(r, ph)| BlochVector::yz(r * ph.cos(), r * ph.sin()))
}

/// Plain RK4 on the 2x2 density matrix with the matrix-form Lindbladian.
fn matrix_rk4(params: &MarkovParams, rho0: CMatrix, tau: f64, steps: usize) -> CMatrix {
    let g = params.generator().unwrap();
    let h = C64::new(tau / steps as f64, 0.0);
    let half = C64::new(0.5, 0.0);
    let mut rho = rho0;
    for _ in 0..steps {
        let k1 = g.matrix_rhs(&rho);
        let k2 = g.matrix_rhs(&(&rho + &k1 * h * half));
        let k3 = g.matrix_rhs(&(&rho + &k2 * h * half));
        let k4 = g.matrix_rhs(&(&rho + &k3 * h));
        rho += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * h / C64::new(6.0, 0.0);
    }
    rho
}

#[test]
fn analytic_steady_state_matches_long_matrix_integration() {
    for interpretation in physical_grid() {
        for gamma_prime in [0.52, 0.94] {
            let params = MarkovParams::new(100.0, gamma_prime, interpretation).unwrap();
            let Ok(target) = steady_state(&params) else { continue };
            let g = params.generator().unwrap();
            // h * rate inside the RK4 stability region; the fixed point of the
            // discrete map is the exact one, so accuracy at tau = 200 is not step-limited
            let steps = ((200.0 * g.max_rate() / 0.5).ceil() as usize).max(2_000);
            let rho = matrix_rk4(&params, BlochVector::new(0.1, 0.3, -0.2).to_density().unwrap().entries().clone(), 200.0, steps);
            let x = 2.0 * rho[(0, 1)].re;
            let y = -2.0 * rho[(0, 1)].im;
            let z = (rho[(0, 0)] - rho[(1, 1)]).re;
            let err = ((x - target.x).powi(2) + (y - target.y).powi(2) + (z - target.z).powi(2)).sqrt();
            assert!(err < 1e-6, "{interpretation} g'={gamma_prime}: {err}");
        }
    }
}

#[test]
fn pure_decay_relaxes_to_pole() {
    for pole in [1, -1] {
        let it = ModelInterpretation {
            rate_rule: RateRule::Magnitude,
            rotation_sign: 1,
            decay_pole: pole,
            hamiltonian_scale: HamiltonianScale::Off,
        };
        let params = MarkovParams::new(0.5, 0.94, it).unwrap();
        let r = steady_state(&params).unwrap();
        assert_eq!((r.x, r.y, r.z), (0.0, 0.0, f64::from(pole)));
    }
}

#[test]
fn doubling_steps_moves_total_length_below_tolerance() {
    let it = selected();
    for anchor in reference_anchors() {
        let params = MarkovParams::new(anchor.alpha, anchor.gamma_prime, it).unwrap();
        for r0 in [anchor.state_a(), anchor.state_b()] {
            for metric in MetricKind::ALL {
                if metric == MetricKind::Hm && r0.norm() > 0.999 {
                    continue;
                }
                let (coarse, _) = total_length_and_distance(r0, &params, metric, DEFAULT_STEPS, DEFAULT_TAU_MAX).unwrap();
                let (fine, _) =
                    total_length_and_distance(r0, &params, metric, 2 * DEFAULT_STEPS, DEFAULT_TAU_MAX).unwrap();
                assert!((coarse - fine).abs() < 1e-4, "{:?} {metric}: {coarse} vs {fine}", anchor.case);
            }
        }
    }
}

#[test]
fn residue_is_nonincreasing_and_ends_near_zero() {
    let it = selected();
    for anchor in reference_anchors() {
        let params = MarkovParams::new(anchor.alpha, anchor.gamma_prime, it).unwrap();
        let rec = TrajectoryRecord::simulate(anchor.state_a(), &params, MetricKind::Sld, DEFAULT_STEPS, DEFAULT_TAU_MAX)
            .unwrap();
        assert!(rec.ell.windows(2).all(|w| w[1] >= w[0]));
        assert!(rec.residue.windows(2).all(|w| w[1] <= w[0]));
        let last = *rec.residue.last().unwrap();
        assert!((-1e-6..=1e-3).contains(&last));
        for (r, l) in rec.residue.iter().zip(&rec.ell) {
            assert!((r - (rec.total_length - l)).abs() < 1e-15);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn path_length_dominates_initial_distance(
        r0 in disk_point(0.999),
        gamma_prime in 0.3..1.5f64,
        pick in 0usize..24,
    ) {
        let it = physical_grid()[pick];
        let params = MarkovParams::new(100.0, gamma_prime, it).unwrap();
        prop_assume!(steady_state(&params).is_ok());
        let (l, d0) = total_length_and_distance(r0, &params, MetricKind::Sld, 400, DEFAULT_TAU_MAX).unwrap();
        prop_assert!(l >= d0 - 1e-6, "{l} < {d0}");
    }

    #[test]
    fn metrics_are_ordered_along_a_trajectory(r0 in interior(0.95), gamma_prime in 0.3..1.5f64) {
        let params = MarkovParams::new(100.0, gamma_prime, selected()).unwrap();
        let run = |m| TrajectoryRecord::simulate(r0, &params, m, 300, DEFAULT_TAU_MAX).unwrap();
        let (sld, wy, hm) = (run(MetricKind::Sld), run(MetricKind::Wy), run(MetricKind::Hm));
        for j in 0..sld.ell.len() {
            prop_assert!(sld.ell[j] <= wy.ell[j] + 1e-9);
            prop_assert!(wy.ell[j] <= hm.ell[j] + 1e-9);
        }
    }

    #[test]
    fn x_component_decouples(y0 in -0.6..0.6f64, z0 in -0.6..0.6f64, x0 in -0.7..0.7f64, gamma_prime in 0.3..1.5f64) {
        prop_assume!(x0 * x0 + y0 * y0 + z0 * z0 < 0.999);
        let params = MarkovParams::new(100.0, gamma_prime, selected()).unwrap();
        let with_x = integrate(BlochVector::new(x0, y0, z0), &params, 300, DEFAULT_TAU_MAX).unwrap();
        let without = integrate(BlochVector::yz(y0, z0), &params, 300, DEFAULT_TAU_MAX).unwrap();
        prop_assert_eq!(with_x.states.len(), without.states.len());
        for (a, b) in with_x.states.iter().zip(&without.states) {
            prop_assert!((a.y - b.y).abs() < 1e-10 && (a.z - b.z).abs() < 1e-10);
        }
    }
}
