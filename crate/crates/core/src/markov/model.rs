use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qgeom::{BlochVector, CMatrix, DensityMatrix, TangentOperator};

/// How `alpha` is split into decay and dephasing rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateRule {
    /// `(alpha, 1 - alpha)`
    Literal,
    /// `(alpha, |1 - alpha|)`
    Magnitude,
    /// `(alpha / 100, 1 - alpha / 100)`
    Percent,
    /// `(alpha, 1)`
    UnitDephasing,
}

impl RateRule {
    pub const ALL: [RateRule; 4] = [RateRule::Literal, RateRule::Magnitude, RateRule::Percent, RateRule::UnitDephasing];

    /// `(decay, dephasing)` rates in units of the total decoherence rate.
    pub fn rates(self, alpha: f64) -> (f64, f64) {
        match self {
            RateRule::Literal => (alpha, 1.0 - alpha),
            RateRule::Magnitude => (alpha, (1.0 - alpha).abs()),
            RateRule::Percent => (alpha / 100.0, 1.0 - alpha / 100.0),
            RateRule::UnitDephasing => (alpha, 1.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RateRule::Literal => "literal",
            RateRule::Magnitude => "magnitude",
            RateRule::Percent => "percent",
            RateRule::UnitDephasing => "unit_dephasing",
        }
    }
}

impl std::str::FromStr for RateRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RateRule::ALL
            .into_iter()
            .find(|r| r.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Configuration(format!("unknown rate rule '{s}'")))
    }
}

/// Angular frequency of the `sigma_x` rotation relative to `1 / gamma'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianScale {
    /// `omega = 1 / gamma'`
    Inverse,
    /// `omega = 1 / (2 gamma')`
    HalfInverse,
    /// No coherent drive. Not part of the calibration grid.
    Off,
}

impl HamiltonianScale {
    pub fn omega(self, gamma_prime: f64) -> f64 {
        match self {
            HamiltonianScale::Inverse => 1.0 / gamma_prime,
            HamiltonianScale::HalfInverse => 0.5 / gamma_prime,
            HamiltonianScale::Off => 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HamiltonianScale::Inverse => "1/g'",
            HamiltonianScale::HalfInverse => "1/(2g')",
            HamiltonianScale::Off => "0",
        }
    }
}

/// One reading of the single-qubit master equation's normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelInterpretation {
    pub rate_rule: RateRule,
    /// +1 or -1
    pub rotation_sign: i8,
    /// Bloch z of the decay target, +1 or -1
    pub decay_pole: i8,
    pub hamiltonian_scale: HamiltonianScale,
}

impl ModelInterpretation {
    /// The 32 candidates in lexicographic order.
    pub fn grid() -> Vec<ModelInterpretation> {
        let mut out = Vec::with_capacity(32);
        for rate_rule in RateRule::ALL {
            for rotation_sign in [1, -1] {
                for decay_pole in [1, -1] {
                    for hamiltonian_scale in [HamiltonianScale::Inverse, HamiltonianScale::HalfInverse] {
                        out.push(ModelInterpretation { rate_rule, rotation_sign, decay_pole, hamiltonian_scale });
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for ModelInterpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/sign{:+}/pole{:+}/omega={}",
            self.rate_rule.name(),
            self.rotation_sign,
            self.decay_pole,
            self.hamiltonian_scale.name()
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkovParams {
    pub alpha: f64,
    pub gamma_prime: f64,
    pub interpretation: ModelInterpretation,
}

impl MarkovParams {
    pub fn new(alpha: f64, gamma_prime: f64, interpretation: ModelInterpretation) -> Result<Self> {
        if !(gamma_prime > 0.0) || !(alpha >= 0.0) {
            return Err(Error::Configuration(format!(
                "need alpha >= 0 and gamma' > 0, got alpha = {alpha}, gamma' = {gamma_prime}"
            )));
        }
        Ok(Self { alpha, gamma_prime, interpretation })
    }

    /// Rates as implied by the interpretation, without the sign check.
    pub fn raw_generator(&self) -> QubitLindblad {
        let (decay, dephasing) = self.interpretation.rate_rule.rates(self.alpha);
        QubitLindblad {
            decay,
            dephasing,
            omega: f64::from(self.interpretation.rotation_sign)
                * self.interpretation.hamiltonian_scale.omega(self.gamma_prime),
            pole: f64::from(self.interpretation.decay_pole),
        }
    }

    /// The generator, rejecting negative rates.
    pub fn generator(&self) -> Result<QubitLindblad> {
        let g = self.raw_generator();
        if g.decay < 0.0 || g.dephasing < 0.0 {
            return Err(Error::Configuration(format!(
                "{} gives negative rate (decay {}, dephasing {})",
                self.interpretation, g.decay, g.dephasing
            )));
        }
        Ok(g)
    }
}

/// Rotation about x at angular frequency `omega`, amplitude decay toward the
/// `pole` at rate `decay`, and projector dephasing at rate `dephasing`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitLindblad {
    pub decay: f64,
    pub dephasing: f64,
    pub omega: f64,
    pub pole: f64,
}

impl QubitLindblad {
    pub fn transverse_rate(&self) -> f64 {
        (self.decay + self.dephasing) / 2.0
    }

    /// Bound on the spectral radius of the Bloch generator.
    pub fn max_rate(&self) -> f64 {
        self.transverse_rate().abs().max(self.decay.abs()) + self.omega.abs()
    }

    pub fn rhs(&self, r: [f64; 3]) -> [f64; 3] {
        let gt = self.transverse_rate();
        let [x, y, z] = r;
        [-gt * x, -gt * y - self.omega * z, self.omega * y + self.decay * (self.pole - z)]
    }

    /// Lindbladian applied to a 2x2 density matrix.
    pub fn matrix_rhs(&self, rho: &CMatrix) -> CMatrix {
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let h = CMatrix::from_row_slice(2, 2, &[zero, one, one, zero]) * C64::new(self.omega / 2.0, 0.0);
        // index 0 is the +z state
        let jump = if self.pole > 0.0 {
            CMatrix::from_row_slice(2, 2, &[zero, one, zero, zero])
        } else {
            CMatrix::from_row_slice(2, 2, &[zero, zero, one, zero])
        };
        let projector = CMatrix::from_row_slice(2, 2, &[one, zero, zero, zero]);
        let commutator = &h * rho - rho * &h;
        commutator * (-i)
            + dissipator(&jump, rho) * C64::new(self.decay, 0.0)
            + dissipator(&projector, rho) * C64::new(self.dephasing, 0.0)
    }

    /// Fixed point of the Bloch equations, without the physicality check.
    pub fn fixed_point(&self) -> Result<BlochVector> {
        let gt = self.transverse_rate();
        let det = gt * self.decay + self.omega * self.omega;
        if det.abs() < 1e-300 {
            return Err(Error::Configuration("steady state is not unique".into()));
        }
        let y = -self.omega * self.decay * self.pole / det;
        let z = gt * self.decay * self.pole / det;
        Ok(BlochVector::yz(y, z))
    }
}

fn dissipator(op: &CMatrix, rho: &CMatrix) -> CMatrix {
    let od = op.adjoint();
    let ood = &od * op;
    op * rho * &od - (&ood * rho + rho * &ood) * C64::new(0.5, 0.0)
}

/// `dr/dtau` under the chosen interpretation.
pub fn bloch_rhs(r: BlochVector, params: &MarkovParams) -> Result<[f64; 3]> {
    if r.norm() > 1.0 + 1e-9 {
        return Err(Error::Domain(format!("Bloch vector norm {} > 1", r.norm())));
    }
    Ok(params.generator()?.rhs(r.as_array()))
}

/// Full matrix-form Lindbladian; independent of [`bloch_rhs`].
pub fn matrix_rhs(rho: &DensityMatrix, params: &MarkovParams) -> Result<TangentOperator> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: 2 });
    }
    let g = params.generator()?;
    TangentOperator::new(g.matrix_rhs(rho.entries()))
}

/// Analytic fixed point; errors when it lies outside the Bloch ball.
pub fn steady_state(params: &MarkovParams) -> Result<BlochVector> {
    let r = params.raw_generator().fixed_point()?;
    let norm = r.norm();
    if norm > 1.0 + 1e-12 {
        return Err(Error::Unphysical { norm });
    }
    Ok(r)
}

/// Largest `h * rate` allowed before the step count is raised.
pub const MAX_STEP_STIFFNESS: f64 = 0.025;

pub const DEFAULT_STEPS: usize = 1000;
pub const DEFAULT_TAU_MAX: f64 = 30.0;

/// Uniformly sampled solution of the Bloch equations.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<BlochVector>,
}

/// Number of RK4 steps used for a requested `n_steps`, raised to a multiple
/// of `n_steps` so that `h * max_rate <= MAX_STEP_STIFFNESS`. The requested
/// grid is then every `effective / n_steps`-th sample.
pub fn effective_steps(generator: &QubitLindblad, n_steps: usize, tau_max: f64) -> usize {
    let n_steps = n_steps.max(1);
    let needed = (tau_max * generator.max_rate() / MAX_STEP_STIFFNESS).ceil() as usize;
    needed.div_ceil(n_steps).max(1) * n_steps
}

fn rk4_step(g: &QubitLindblad, r: [f64; 3], h: f64) -> [f64; 3] {
    let add = |a: [f64; 3], b: [f64; 3], s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
    let k1 = g.rhs(r);
    let k2 = g.rhs(add(r, k1, h / 2.0));
    let k3 = g.rhs(add(r, k2, h / 2.0));
    let k4 = g.rhs(add(r, k3, h));
    [
        r[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        r[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        r[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ]
}

/// Relative change of the speed scale across one step above which the step
/// is bisected.
pub const REFINE_TOL: f64 = 0.01;
/// Maximum bisection depth per outer step.
pub const MAX_REFINE_DEPTH: u32 = 16;

/// `|d(y, z)/dtau| / sqrt(1 - y^2 - z^2)`, the scale of the speed
/// singularity near pure states. Uses only `(y, z)` so the sample grid does not
/// depend on `x`.
fn speed_scale(g: &QubitLindblad, r: [f64; 3]) -> f64 {
    let d = g.rhs(r);
    let purity_gap = 1.0 - r[1] * r[1] - r[2] * r[2];
    if purity_gap <= 0.0 {
        return f64::INFINITY;
    }
    (d[1] * d[1] + d[2] * d[2]).sqrt() / purity_gap.sqrt()
}

fn needs_refinement(h: f64, s0: f64, s1: f64) -> bool {
    let hi = s0.max(s1);
    hi.is_finite() && h * hi > 1e-12 && (s1 - s0).abs() > REFINE_TOL * hi
}

struct Walker<'a, F> {
    g: &'a QubitLindblad,
    visit: F,
    samples: usize,
}

impl<F: FnMut(f64, BlochVector, bool)> Walker<'_, F> {
    /// One step of size `h` from `t`. `grid_time` is set when the final sample
    /// closes an outer step.
    fn advance(&mut self, r: [f64; 3], s: f64, t: f64, h: f64, depth: u32, grid_time: Option<f64>) -> Result<([f64; 3], f64)> {
        let r1 = rk4_step(self.g, r, h);
        let s1 = speed_scale(self.g, r1);
        if depth < MAX_REFINE_DEPTH && needs_refinement(h, s, s1) {
            let (rm, sm) = self.advance(r, s, t, h / 2.0, depth + 1, None)?;
            return self.advance(rm, sm, t + h / 2.0, h / 2.0, depth + 1, grid_time);
        }
        let state = BlochVector::new(r1[0], r1[1], r1[2]);
        let norm = state.norm();
        self.samples += 1;
        if !(norm <= 1.0 + 1e-6) {
            return Err(Error::Instability { step: self.samples, norm });
        }
        (self.visit)(grid_time.unwrap_or(t + h), state, grid_time.is_some());
        Ok((r1, s1))
    }
}

/// Walks the fixed-step RK4 solution, calling `visit(tau, state, on_grid)`
/// on every sample including the initial one. A step whose speed scale
/// changes by more than [`REFINE_TOL`] is bisected; the intermediate samples
/// are visited with `on_grid = false` so quadratures can use them while the
/// stored grid stays uniform. Returns the final state.
pub(crate) fn integrate_with(
    r0: BlochVector,
    g: &QubitLindblad,
    n_steps: usize,
    tau_max: f64,
    visit: impl FnMut(f64, BlochVector, bool),
) -> Result<BlochVector> {
    if r0.norm() > 1.0 + 1e-12 {
        return Err(Error::Domain(format!("initial Bloch norm {} > 1", r0.norm())));
    }
    let n = effective_steps(g, n_steps, tau_max);
    let h = tau_max / n as f64;
    let mut walker = Walker { g, visit, samples: 0 };
    (walker.visit)(0.0, r0, true);
    let mut r = r0.as_array();
    let mut s = speed_scale(g, r);
    for k in 0..n {
        (r, s) = walker.advance(r, s, k as f64 * h, h, 0, Some((k + 1) as f64 * h))?;
    }
    Ok(BlochVector::new(r[0], r[1], r[2]))
}

/// Classical RK4 from `tau = 0` to `tau_max`, see [`integrate_with`].
pub fn integrate(r0: BlochVector, params: &MarkovParams, n_steps: usize, tau_max: f64) -> Result<Trajectory> {
    let g = params.generator()?;
    let n = effective_steps(&g, n_steps, tau_max);
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    integrate_with(r0, &g, n_steps, tau_max, |t, s, on_grid| {
        if on_grid {
            times.push(t);
            states.push(s);
        }
    })?;
    Ok(Trajectory { times, states })
}
