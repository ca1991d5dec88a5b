use std::path::Path;
use std::time::Instant;

use clap::Args;
use iqme::analysis::{iqme_verdict, qme_verdict, universal_iqme_check, MpembaVerdict};
use iqme::markov::{
    distance_map, reference_case, CaseLabel, MarkovParams, TrajectoryRecord, DEFAULT_SPACING, DEFAULT_STEPS,
    DEFAULT_TAU_MAX, REFERENCE_ALPHA, SPEED_CLIP,
};
use iqme::{BlochVector, MetricKind};
use serde_json::{json, Value};

use crate::calibrate::{load_interpretation, InterpretationFile};
use crate::manifest::{emit, num, CsvOutput, RunManifest};
use crate::{svg, CliError, CliResult};

fn parse_case(s: &str) -> Result<CaseLabel, String> {
    s.parse().map_err(|e: iqme::Error| e.to_string())
}

fn parse_metric(s: &str) -> Result<MetricKind, String> {
    s.parse().map_err(|e: iqme::Error| e.to_string())
}

/// `y,z` pair.
fn parse_point(s: &str) -> Result<(f64, f64), String> {
    let (y, z) = s.split_once(',').ok_or_else(|| format!("expected 'y,z', got '{s}'"))?;
    let y: f64 = y.trim().parse().map_err(|_| format!("bad y in '{s}'"))?;
    let z: f64 = z.trim().parse().map_err(|_| format!("bad z in '{s}'"))?;
    Ok((y, z))
}

#[derive(Debug, Clone, Args)]
pub struct MarkovArgs {
    /// Reference case (i, ii, iii, iv).
    #[arg(long, value_parser = parse_case, conflicts_with_all = ["gamma_prime", "a", "b"])]
    pub case: Option<CaseLabel>,
    /// Decay-rate parameter.
    #[arg(long, default_value_t = REFERENCE_ALPHA)]
    pub alpha: f64,
    #[arg(long)]
    pub gamma_prime: Option<f64>,
    /// Initial state A as `y,z`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub a: Option<(f64, f64)>,
    /// Initial state B as `y,z`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub b: Option<(f64, f64)>,
    /// sld, hm or wy.
    #[arg(long, value_parser = parse_metric, default_value = "sld")]
    pub metric: MetricKind,
    /// Also evaluate the metric-independent criterion from SLD and HM residues.
    #[arg(long)]
    pub universal: bool,
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    pub steps: usize,
    #[arg(long, default_value_t = DEFAULT_TAU_MAX)]
    pub tau_max: f64,
}

struct Setup {
    label: String,
    alpha: f64,
    gamma_prime: f64,
    a: (f64, f64),
    b: (f64, f64),
}

impl MarkovArgs {
    fn setup(&self) -> CliResult<Setup> {
        if let Some(case) = self.case {
            let anchor = reference_case(case);
            return Ok(Setup {
                label: format!("case_{case}"),
                alpha: self.alpha,
                gamma_prime: anchor.gamma_prime,
                a: anchor.a,
                b: anchor.b,
            });
        }
        match (self.gamma_prime, self.a, self.b) {
            (Some(gamma_prime), Some(a), Some(b)) => {
                Ok(Setup { label: "custom".into(), alpha: self.alpha, gamma_prime, a, b })
            }
            _ => Err(CliError::Usage("give --case, or all of --gamma-prime, --a and --b".into())),
        }
    }
}

fn verdict_json(v: &MpembaVerdict) -> Value {
    json!({
        "kind": v.kind.name(),
        "t_c": v.t_c,
        "margin": v.margin,
        "first": v.labels.0,
        "second": v.labels.1,
        "relabeled": v.relabeled,
    })
}

fn describe(v: &MpembaVerdict) -> String {
    match v.t_c {
        Some(t) => format!("{} at t_c = {t:.4} ({} starts above {})", v.kind.name(), v.labels.0, v.labels.1),
        None => v.kind.name().to_string(),
    }
}

fn base_manifest(command: &str, params: Value, calib: &InterpretationFile) -> RunManifest {
    let mut m = RunManifest::new(command, params);
    m.interpretation = Some(calib.interpretation);
    m.calibration = Some(calib.status());
    m
}

pub fn run(args: &MarkovArgs, out: &Path) -> CliResult<()> {
    let started = Instant::now();
    let setup = args.setup()?;
    let calib = load_interpretation(out)?;
    if !calib.passed {
        eprintln!(
            "warning: calibration did not pass (max deviation {:.4}); using best candidate {}",
            calib.max_deviation, calib.interpretation
        );
    }
    let params = MarkovParams::new(setup.alpha, setup.gamma_prime, calib.interpretation)?;
    let simulate = |p: (f64, f64), metric| {
        TrajectoryRecord::simulate(BlochVector::yz(p.0, p.1), &params, metric, args.steps, args.tau_max)
    };
    let rec_a = simulate(setup.a, args.metric)?;
    let rec_b = simulate(setup.b, args.metric)?;
    let iqme = iqme_verdict(&rec_a, &rec_b)?;
    let qme = qme_verdict(&rec_a, &rec_b)?;

    let mut table = CsvOutput::new(
        format!("markov_{}_{}.csv", setup.label, args.metric.name()),
        &["tau", "yA", "zA", "ellA", "dA", "RA", "yB", "zB", "ellB", "dB", "RB"],
    );
    // the integrator may refine the requested grid by an integer factor
    let stride = ((rec_a.times.len() - 1) / args.steps.max(1)).max(1);
    for j in (0..rec_a.times.len()).step_by(stride) {
        table.push(vec![
            num(rec_a.times[j]),
            num(rec_a.states[j].y),
            num(rec_a.states[j].z),
            num(rec_a.ell[j]),
            num(rec_a.geo[j]),
            num(rec_a.residue[j]),
            num(rec_b.states[j].y),
            num(rec_b.states[j].z),
            num(rec_b.ell[j]),
            num(rec_b.geo[j]),
            num(rec_b.residue[j]),
        ]);
    }

    let mut results = json!({
        "L_A": rec_a.total_length,
        "L_B": rec_b.total_length,
        "d_A0": rec_a.initial_distance(),
        "d_B0": rec_b.initial_distance(),
        "iqme": verdict_json(&iqme),
        "qme": verdict_json(&qme),
    });
    println!("metric {}: L_A = {:.4}, L_B = {:.4}", args.metric, rec_a.total_length, rec_b.total_length);
    println!("d_A(0) = {:.4}, d_B(0) = {:.4}", rec_a.initial_distance(), rec_b.initial_distance());
    println!("IQME: {}", describe(&iqme));
    println!("QME:  {}", describe(&qme));

    if args.universal {
        let per_metric = |m| -> CliResult<(TrajectoryRecord, TrajectoryRecord)> {
            Ok((simulate(setup.a, m)?, simulate(setup.b, m)?))
        };
        let (a_sld, b_sld) = per_metric(MetricKind::Sld)?;
        let (a_hm, b_hm) = per_metric(MetricKind::Hm)?;
        let universal = universal_iqme_check(&a_sld, &a_hm, &b_sld, &b_hm)?;
        println!("universal IQME: {}", describe(&universal));
        results["universal"] = verdict_json(&universal);
    }

    let params_json = json!({
        "case": args.case.map(|c| c.as_str()),
        "alpha": setup.alpha,
        "gamma_prime": setup.gamma_prime,
        "a": [setup.a.0, setup.a.1],
        "b": [setup.b.0, setup.b.1],
        "metric": args.metric.name(),
        "universal": args.universal,
        "steps": args.steps,
        "tau_max": args.tau_max,
    });
    let mut manifest = base_manifest("markov", params_json, &calib);
    manifest.results = Some(results);
    emit(out, &[table], manifest, started)?;
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct MapArgs {
    #[arg(long, default_value_t = REFERENCE_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.94)]
    pub gamma_prime: f64,
    #[arg(long, value_parser = parse_metric, default_value = "sld")]
    pub metric: MetricKind,
    /// Grid spacing in y and z.
    #[arg(long, default_value_t = DEFAULT_SPACING)]
    pub spacing: f64,
    /// Also write an SVG raster of the excess `L - d0`.
    #[arg(long)]
    pub svg: bool,
    /// Also write the instantaneous speed at every cell, with the clip flag.
    #[arg(long)]
    pub speeds: bool,
}

pub fn run_map(args: &MapArgs, out: &Path) -> CliResult<()> {
    let started = Instant::now();
    if !(args.spacing > 0.0 && args.spacing <= 1.0) {
        return Err(CliError::Usage(format!("spacing must be in (0, 1], got {}", args.spacing)));
    }
    let calib = load_interpretation(out)?;
    let params = MarkovParams::new(args.alpha, args.gamma_prime, calib.interpretation)?;
    let cells = distance_map(&params, args.spacing, args.metric)?;
    let stem = format!("markov_map_{}_g{}", args.metric.name(), args.gamma_prime);

    let mut outputs = Vec::new();
    let mut table = CsvOutput::new(format!("{stem}.csv"), &["y", "z", "L", "d0", "excess"]);
    for c in &cells {
        table.push(vec![num(c.y), num(c.z), num(c.length), num(c.distance), num(c.excess())]);
    }
    outputs.push(table);
    if args.speeds {
        let mut speeds = CsvOutput::new(format!("{stem}_speed.csv"), &["y", "z", "speed", "speed_clipped", "clipped"]);
        for c in &cells {
            speeds.push(vec![
                num(c.y),
                num(c.z),
                num(c.speed),
                num(c.clipped_speed()),
                (c.speed > SPEED_CLIP).to_string(),
            ]);
        }
        outputs.push(speeds);
    }

    let min_excess = cells.iter().map(|c| c.excess()).fold(f64::INFINITY, f64::min);
    let axis_max = cells.iter().filter(|c| c.y.abs() < 1e-12).map(|c| c.excess()).fold(f64::NEG_INFINITY, f64::max);
    println!("{} cells, min excess {min_excess:.3e}, max excess on y = 0: {axis_max:.3e}", cells.len());

    let params_json = json!({
        "alpha": args.alpha,
        "gamma_prime": args.gamma_prime,
        "metric": args.metric.name(),
        "spacing": args.spacing,
        "svg": args.svg,
        "speeds": args.speeds,
    });
    let mut manifest = base_manifest("markov-map", params_json, &calib);
    manifest.results = Some(json!({ "cells": cells.len(), "min_excess": min_excess, "max_axis_excess": axis_max }));
    emit(out, &outputs, manifest, started)?;
    if args.svg {
        let points: Vec<(f64, f64, f64)> = cells.iter().map(|c| (c.y, c.z, c.excess())).collect();
        std::fs::write(out.join(format!("{stem}.svg")), svg::heatmap(&points, args.spacing))?;
    }
    Ok(())
}
