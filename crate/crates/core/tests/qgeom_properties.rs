use iqme::qgeom::{
    affinity, general_fidelity, geodesic_distance, petz_speed, qubit_speed_closed_form, uhlmann_fidelity, CMatrix,
};
use iqme::{BlochVector, DensityMatrix, MetricKind, TangentOperator};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

/// Density matrix built from explicit entries, so its spectrum comes from the
/// numerical eigensolver rather than the Bloch closed form.
fn numeric(r: BlochVector) -> DensityMatrix {
    DensityMatrix::new(r.to_density().unwrap().entries().clone()).unwrap()
}

fn bloch(max_radius: f64) -> impl Strategy<Value = BlochVector> {
    (0.0..max_radius, 0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU).prop_map(|(r, th, ph)| {
        BlochVector::new(r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos())
    })
}

fn rate() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-2.0..2.0f64)
}

/// Random density matrix of dimension `dim` from a Ginibre matrix.
fn ginibre_state(dim: usize) -> impl Strategy<Value = DensityMatrix> {
    prop::collection::vec(-1.0..1.0f64, 2 * dim * dim).prop_map(move |v| {
        let g = DMatrix::from_fn(dim, dim, |i, j| C64::new(v[2 * (i * dim + j)], v[2 * (i * dim + j) + 1]));
        let mut m: CMatrix = &g * g.adjoint();
        let tr = m.trace();
        m /= tr;
        // keep away from the boundary so every metric is defined
        let mixed = m * C64::new(0.95, 0.0) + CMatrix::identity(dim, dim) * C64::new(0.05 / dim as f64, 0.0);
        DensityMatrix::new(mixed).unwrap()
    })
}

fn hermitian_traceless(dim: usize) -> impl Strategy<Value = TangentOperator> {
    prop::collection::vec(-1.0..1.0f64, 2 * dim * dim).prop_map(move |v| {
        let g = DMatrix::from_fn(dim, dim, |i, j| C64::new(v[2 * (i * dim + j)], v[2 * (i * dim + j) + 1]));
        let mut h: CMatrix = (&g + g.adjoint()) * C64::new(0.5, 0.0);
        let shift = h.trace() / C64::new(dim as f64, 0.0);
        for i in 0..dim {
            h[(i, i)] -= shift;
        }
        TangentOperator::new(h).unwrap()
    })
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn eigen_sum_matches_bloch_closed_form(r in bloch(0.999), v in rate()) {
        let rho = numeric(r);
        let x = TangentOperator::from_bloch_rate(v);
        for metric in MetricKind::ALL {
            let eig = petz_speed(&rho, &x, metric).unwrap();
            let closed = qubit_speed_closed_form(r, v, metric).unwrap();
            prop_assert!(rel_err(eig, closed) < 1e-9, "{metric}: {eig} vs {closed}");
        }
    }

    #[test]
    fn fidelity_paths_agree(r in bloch(1.0), s in bloch(1.0)) {
        let (a, b) = (numeric(r), numeric(s));
        let fast = uhlmann_fidelity(&a, &b).unwrap();
        prop_assert!((fast - general_fidelity(&a, &b)).abs() < 1e-9);
        prop_assert!((fast - uhlmann_fidelity(&b, &a).unwrap()).abs() < 1e-9);
        prop_assert!((fast - r.fidelity(&s)).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&fast));
    }

    #[test]
    fn affinity_is_below_fidelity(a in ginibre_state(3), b in ginibre_state(3)) {
        let aff = affinity(&a, &b).unwrap();
        prop_assert!((aff - affinity(&b, &a).unwrap()).abs() < 1e-9);
        prop_assert!(aff <= uhlmann_fidelity(&a, &b).unwrap() + 1e-9);
    }

    #[test]
    fn metric_sandwich(rho in ginibre_state(3), x in hermitian_traceless(3)) {
        let sld = petz_speed(&rho, &x, MetricKind::Sld).unwrap();
        let wy = petz_speed(&rho, &x, MetricKind::Wy).unwrap();
        let hm = petz_speed(&rho, &x, MetricKind::Hm).unwrap();
        prop_assert!(sld <= wy + 1e-12 * wy.max(1.0));
        prop_assert!(wy <= hm + 1e-12 * hm.max(1.0));
    }

    #[test]
    fn commuting_arguments_give_classical_fisher(
        p in prop::collection::vec(0.05..1.0f64, 4),
        d in prop::collection::vec(-1.0..1.0f64, 4),
    ) {
        let total: f64 = p.iter().sum();
        let probs: Vec<f64> = p.iter().map(|x| x / total).collect();
        let mean = d.iter().sum::<f64>() / 4.0;
        let diag: Vec<C64> = d.iter().map(|x| C64::new(x - mean, 0.0)).collect();
        let x = TangentOperator::new(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag.clone()))).unwrap();
        let rho = DensityMatrix::diagonal(&probs).unwrap();
        let fisher: f64 = probs.iter().zip(&diag).map(|(p, x)| x.re * x.re / p).sum();
        for metric in MetricKind::ALL {
            let v = petz_speed(&rho, &x, metric).unwrap();
            prop_assert!((v - fisher).abs() < 1e-10 * fisher.max(1.0));
        }
    }

    #[test]
    fn depolarizing_contracts_geodesic_distance(r in bloch(1.0), s in bloch(1.0)) {
        let (a, b) = (numeric(r), numeric(s));
        let before = geodesic_distance(&a, &b, MetricKind::Sld).unwrap();
        for p in [0.1, 0.3, 0.5] {
            let after = geodesic_distance(&a.depolarize(p).unwrap(), &b.depolarize(p).unwrap(), MetricKind::Sld).unwrap();
            prop_assert!(after <= before + 1e-9);
        }
    }

    #[test]
    fn geodesic_triangle_inequality(a in ginibre_state(2), b in ginibre_state(2), c in ginibre_state(2)) {
        for metric in [MetricKind::Sld, MetricKind::Wy] {
            let ab = geodesic_distance(&a, &b, metric).unwrap();
            let bc = geodesic_distance(&b, &c, metric).unwrap();
            let ac = geodesic_distance(&a, &c, metric).unwrap();
            prop_assert!(ac <= ab + bc + 1e-9);
        }
    }

    #[test]
    fn bloch_round_trip(r in bloch(1.0)) {
        let back = BlochVector::from_density(&numeric(r)).unwrap();
        prop_assert!((back.x - r.x).abs() < 1e-12 && (back.y - r.y).abs() < 1e-12 && (back.z - r.z).abs() < 1e-12);
    }
}

#[test]
fn general_fidelity_is_symmetric_in_higher_dimension() {
    let a = DensityMatrix::diagonal(&[0.5, 0.3, 0.2]).unwrap();
    let psi = [C64::new(0.6, 0.0), C64::new(0.0, 0.8), C64::new(0.0, 0.0)];
    let b = DensityMatrix::pure(&psi).unwrap().depolarize(0.2).unwrap();
    let ab = uhlmann_fidelity(&a, &b).unwrap();
    let ba = uhlmann_fidelity(&b, &a).unwrap();
    assert!((ab - ba).abs() < 1e-9);
    assert!((uhlmann_fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-9);
}
