use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use clap::Args;
use iqme::analysis::circuit_verdict;
use iqme::circuit::{
    convergence_check, run_ensemble, CircuitConfig, Ensemble, StateFamily, Subsystem, CONVERGENCE_SLOPE_TOL,
    CONVERGENCE_WINDOW, DEFAULT_HORIZON, DEFAULT_QUBITS,
};
use iqme::MetricKind;
use serde_json::json;

use crate::manifest::{emit, num, CsvOutput, RunManifest};
use crate::CliResult;

/// Trajectory count used when `--trajectories` is not given.
pub const CLI_DEFAULT_TRAJECTORIES: usize = 500;

/// Angle in radians; a `pi` suffix reads the number as a multiple of pi.
pub fn parse_theta(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let value = if let Some(k) = s.strip_suffix("pi").or_else(|| s.strip_suffix('π')) {
        let k = k.trim();
        let k: f64 = if k.is_empty() { 1.0 } else { k.parse().map_err(|_| format!("bad angle '{s}'"))? };
        k * PI
    } else {
        s.parse().map_err(|_| format!("bad angle '{s}'"))?
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("bad angle '{s}'"))
    }
}

/// `theta / pi` with trailing zeros removed, e.g. `0.45pi`.
pub fn theta_label(theta: f64) -> String {
    let k = format!("{:.6}", theta / PI);
    let k = k.trim_end_matches('0').trim_end_matches('.');
    format!("{k}pi")
}

fn parse_family(s: &str) -> Result<StateFamily, String> {
    s.parse().map_err(|e: iqme::Error| e.to_string())
}

fn parse_subsystem(s: &str) -> Result<Subsystem, String> {
    s.parse().map_err(|e: iqme::Error| e.to_string())
}

fn parse_circuit_metric(s: &str) -> Result<MetricKind, String> {
    match s.parse::<MetricKind>().map_err(|e| e.to_string())? {
        MetricKind::Hm => Err("hm has no closed-form geodesic; circuit runs accept sld or wy".into()),
        m => Ok(m),
    }
}

#[derive(Debug, Clone, Args)]
pub struct CircuitArgs {
    /// Number of qubits.
    #[arg(long, default_value_t = DEFAULT_QUBITS)]
    pub n: usize,
    /// Comma-separated tilt angles, e.g. `0.1pi,0.5pi`.
    #[arg(long, required = true, value_delimiter = ',', value_parser = parse_theta, allow_hyphen_values = true)]
    pub theta: Vec<f64>,
    /// neel, ferro or ferro-domain-wall.
    #[arg(long, value_parser = parse_family, default_value = "neel")]
    pub family: StateFamily,
    /// 1 or quarter.
    #[arg(long, value_parser = parse_subsystem, default_value = "1")]
    pub subsystem: Subsystem,
    /// First qubit of the observed block.
    #[arg(long, default_value_t = 0)]
    pub subsystem_start: usize,
    /// sld or wy.
    #[arg(long, value_parser = parse_circuit_metric, default_value = "sld")]
    pub metric: MetricKind,
    /// Horizon in time steps (two brick-wall layers each).
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    pub steps: usize,
    /// Trajectory count; full-scale runs use 10000.
    #[arg(long, default_value_t = CLI_DEFAULT_TRAJECTORIES)]
    pub trajectories: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl CircuitArgs {
    pub fn config(&self, theta: f64) -> CircuitConfig {
        CircuitConfig {
            n_qubits: self.n,
            theta,
            family: self.family,
            subsystem: self.subsystem,
            subsystem_start: self.subsystem_start,
            metric: self.metric,
            horizon: self.steps,
            n_trajectories: self.trajectories,
            master_seed: self.seed,
        }
    }

    fn stem(&self) -> String {
        let sub = match self.subsystem {
            Subsystem::Single => "site".to_string(),
            Subsystem::Quarter => "quarter".to_string(),
        };
        format!("circuit_{}_n{}_{sub}_{}", self.family.name(), self.n, self.metric.name())
    }
}

fn curve_table(stem: &str, theta: f64, ens: &Ensemble) -> CsvOutput {
    let mut t = CsvOutput::new(format!("{stem}_{}.csv", theta_label(theta)), &["step", "mean_ell", "std_err", "residue"]);
    let c = &ens.curve;
    for j in 0..c.times.len() {
        t.push(vec![c.times[j].to_string(), num(c.mean_ell[j]), num(c.std_err[j]), num(c.residue[j])]);
    }
    t
}

pub fn run(args: &CircuitArgs, out: &Path) -> CliResult<()> {
    let started = Instant::now();
    for &theta in &args.theta {
        args.config(theta).validate()?;
    }
    let stem = args.stem();
    let mut outputs = Vec::new();
    let mut ensembles = Vec::with_capacity(args.theta.len());
    let mut summary = CsvOutput::new(
        format!("{stem}_summary.csv"),
        &[
            "theta",
            "L_mean",
            "L_std_err",
            "converged",
            "final_distance_mean",
            "final_distance_std_err",
            "averaged_state_distance",
        ],
    );
    for &theta in &args.theta {
        let ens = run_ensemble(&args.config(theta))?;
        let last = ens.curve.std_err.len() - 1;
        let converged = convergence_check(&ens.curve, CONVERGENCE_WINDOW, CONVERGENCE_SLOPE_TOL);
        summary.push(vec![
            theta_label(theta),
            num(ens.curve.mean_total),
            num(ens.curve.std_err[last]),
            converged.to_string(),
            num(ens.final_distance_mean),
            num(ens.final_distance_std_err),
            num(ens.averaged_state_distance()?),
        ]);
        println!(
            "theta {:>8}: L = {:.4} +- {:.4}, converged {converged}, final distance {:.4}",
            theta_label(theta),
            ens.curve.mean_total,
            ens.curve.std_err[last],
            ens.final_distance_mean
        );
        outputs.push(curve_table(&stem, theta, &ens));
        ensembles.push((theta, ens));
    }

    let mut verdicts = CsvOutput::new(
        format!("{stem}_verdicts.csv"),
        &["theta_a", "theta_b", "verdict", "first", "t_c", "margin", "within_noise"],
    );
    let mut verdict_json = Vec::new();
    for i in 0..ensembles.len() {
        for j in i + 1..ensembles.len() {
            let (ta, ea) = &ensembles[i];
            let (tb, eb) = &ensembles[j];
            let (la, lb) = (theta_label(*ta), theta_label(*tb));
            let v = circuit_verdict(&ea.curve, &eb.curve, (&la, &lb))?;
            println!(
                "{la} vs {lb}: {}{}",
                v.kind.name(),
                v.t_c.map(|t| format!(" at t_c = {t:.3}")).unwrap_or_default()
            );
            verdicts.push(vec![
                la.clone(),
                lb.clone(),
                v.kind.name().to_string(),
                v.labels.0.clone(),
                v.t_c.map(num).unwrap_or_default(),
                num(v.margin),
                v.within_noise.to_string(),
            ]);
            verdict_json.push(json!({ "theta_a": la, "theta_b": lb, "verdict": v.kind.name(), "t_c": v.t_c }));
        }
    }
    outputs.push(summary);
    outputs.push(verdicts);

    let mut manifest = RunManifest::new(
        "circuit",
        json!({
            "n": args.n,
            "theta": args.theta.iter().map(|&t| theta_label(t)).collect::<Vec<_>>(),
            "theta_radians": args.theta,
            "family": args.family.name(),
            "subsystem": args.subsystem.name(),
            "subsystem_start": args.subsystem_start,
            "metric": args.metric.name(),
            "steps": args.steps,
            "trajectories": args.trajectories,
        }),
    );
    manifest.master_seed = Some(args.seed);
    manifest.results = Some(json!({ "verdicts": verdict_json }));
    emit(out, &outputs, manifest, started)?;
    Ok(())
}
