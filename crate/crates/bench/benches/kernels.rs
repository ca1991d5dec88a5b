use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use iqme::circuit::{apply_step, initial_state, run_trajectory, CircuitConfig, StateFamily};
use iqme::markov::{
    reference_case, CaseLabel, HamiltonianScale, MarkovParams, ModelInterpretation, RateRule, TrajectoryRecord,
    DEFAULT_STEPS, DEFAULT_TAU_MAX,
};
use iqme::qgeom::{petz_speed, qubit_speed_closed_form, uhlmann_fidelity};
use iqme::{BlochVector, DensityMatrix, MetricKind, TangentOperator};

fn qgeom(c: &mut Criterion) {
    let r = BlochVector::new(0.2, -0.4, 0.5);
    let v = [0.3, 0.1, -0.7];
    let rho = DensityMatrix::new(r.to_density().unwrap().entries().clone()).unwrap();
    let x = TangentOperator::from_bloch_rate(v);
    let sigma = BlochVector::yz(0.1, 0.6).to_density().unwrap();
    let mut g = c.benchmark_group("qgeom");
    for metric in MetricKind::ALL {
        g.bench_with_input(BenchmarkId::new("petz_speed", metric), &metric, |b, &m| {
            b.iter(|| petz_speed(black_box(&rho), black_box(&x), m).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("closed_form", metric), &metric, |b, &m| {
            b.iter(|| qubit_speed_closed_form(black_box(r), black_box(v), m).unwrap())
        });
    }
    g.bench_function("fidelity_qubit", |b| b.iter(|| uhlmann_fidelity(black_box(&rho), black_box(&sigma)).unwrap()));
    g.finish();
}

fn markov(c: &mut Criterion) {
    let anchor = reference_case(CaseLabel::I);
    let it = ModelInterpretation {
        rate_rule: RateRule::Magnitude,
        rotation_sign: -1,
        decay_pole: -1,
        hamiltonian_scale: HamiltonianScale::HalfInverse,
    };
    let params = MarkovParams::new(anchor.alpha, anchor.gamma_prime, it).unwrap();
    c.bench_function("markov/trajectory_case_i", |b| {
        b.iter(|| {
            TrajectoryRecord::simulate(anchor.state_a(), &params, MetricKind::Sld, DEFAULT_STEPS, DEFAULT_TAU_MAX)
                .unwrap()
        })
    });
}

fn circuit(c: &mut Criterion) {
    let mut g = c.benchmark_group("circuit");
    for n in [8, 12, 16] {
        let psi0 = initial_state(StateFamily::Neel, 0.3 * PI, n).unwrap();
        g.bench_with_input(BenchmarkId::new("step", n), &n, |b, _| {
            b.iter_batched(
                || psi0.clone(),
                |mut psi| apply_step(&mut psi, 1, 0, 0).unwrap(),
                criterion::BatchSize::SmallInput,
            )
        });
    }
    let cfg = CircuitConfig { n_qubits: 12, theta: 0.3 * PI, ..Default::default() };
    g.bench_function("trajectory_n12", |b| b.iter(|| run_trajectory(black_box(&cfg), 0).unwrap()));
    g.finish();
}

criterion_group!(benches, qgeom, markov, circuit);
criterion_main!(benches);
