use std::path::Path;
use std::time::Instant;

use clap::Args;
use iqme::markov::{
    evaluate_candidate, reference_anchors, score_candidates, AnchorQuantity, CalibrationReport, CandidateResult,
    ModelInterpretation, RateRule, CALIBRATION_FAIL_THRESHOLD, CALIBRATION_TARGET,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::manifest::{emit, num, CsvOutput, RunManifest};
use crate::{CliError, CliResult};

pub const INTERPRETATION_FILE: &str = "interpretation.json";
pub const CALIBRATION_FILE: &str = "calibration.csv";

#[derive(Debug, Clone, Args)]
pub struct CalibrateArgs {
    /// Restrict the candidate grid to one rate rule (literal, magnitude, percent, unit_dephasing).
    #[arg(long, value_parser = parse_rate_rule)]
    pub rate_rule: Option<RateRule>,
}

fn parse_rate_rule(s: &str) -> Result<RateRule, String> {
    s.parse().map_err(|e: iqme::Error| e.to_string())
}

/// Persisted calibration outcome read by the Markov commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpretationFile {
    pub interpretation: ModelInterpretation,
    pub max_deviation: f64,
    pub passed: bool,
    pub fail_threshold: f64,
    pub target: f64,
}

impl InterpretationFile {
    fn from_report(report: &CalibrationReport) -> Self {
        let best = report.best();
        Self {
            interpretation: best.interpretation,
            max_deviation: best.max_deviation,
            passed: best.max_deviation <= CALIBRATION_FAIL_THRESHOLD,
            fail_threshold: CALIBRATION_FAIL_THRESHOLD,
            target: CALIBRATION_TARGET,
        }
    }

    pub fn status(&self) -> serde_json::Value {
        json!({
            "passed": self.passed,
            "max_deviation": self.max_deviation,
            "fail_threshold": self.fail_threshold,
        })
    }
}

/// The persisted interpretation in `dir`, or a fresh in-process scoring
/// when none has been written yet.
pub fn load_interpretation(dir: &Path) -> CliResult<InterpretationFile> {
    let path = dir.join(INTERPRETATION_FILE);
    if path.exists() {
        return Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?);
    }
    let report = score_candidates(&reference_anchors(), &ModelInterpretation::grid())?;
    Ok(InterpretationFile::from_report(&report))
}

fn residual_columns() -> Vec<String> {
    let short = |q: AnchorQuantity| match q {
        AnchorQuantity::LengthA => "L_A",
        AnchorQuantity::LengthB => "L_B",
        AnchorQuantity::DistanceA => "dA0",
        AnchorQuantity::DistanceB => "dB0",
    };
    reference_anchors()
        .iter()
        .flat_map(|a| AnchorQuantity::ALL.map(|q| format!("{}_{}", a.case, short(q))))
        .collect()
}

fn table(results: &[CandidateResult], selected: Option<usize>) -> CsvOutput {
    let columns = residual_columns();
    let mut header = vec![
        "candidate",
        "rate_rule",
        "rotation_sign",
        "decay_pole",
        "omega",
        "physical",
        "selected",
        "max_residual",
        "rejection",
    ];
    header.extend(columns.iter().map(String::as_str));
    let mut out = CsvOutput::new(CALIBRATION_FILE, &header);
    for (k, r) in results.iter().enumerate() {
        let it = r.interpretation;
        let mut row = vec![
            it.to_string(),
            it.rate_rule.name().to_string(),
            it.rotation_sign.to_string(),
            it.decay_pole.to_string(),
            it.hamiltonian_scale.name().to_string(),
            r.is_physical().to_string(),
            (selected == Some(k)).to_string(),
            if r.is_physical() { num(r.max_deviation) } else { String::new() },
            r.rejection.clone().unwrap_or_default(),
        ];
        if r.residuals.is_empty() {
            row.extend(std::iter::repeat_n(String::new(), columns.len()));
        } else {
            row.extend(r.residuals.iter().map(|x| num(x.residual())));
        }
        out.push(row);
    }
    out
}

pub fn run(args: &CalibrateArgs, out: &Path) -> CliResult<()> {
    let started = Instant::now();
    let anchors = reference_anchors();
    let grid: Vec<ModelInterpretation> = ModelInterpretation::grid()
        .into_iter()
        .filter(|i| args.rate_rule.is_none_or(|r| i.rate_rule == r))
        .collect();
    let scored = score_candidates(&anchors, &grid);
    let results: Vec<CandidateResult> = match &scored {
        Ok(report) => report.candidates.clone(),
        Err(_) => grid.par_iter().map(|&c| evaluate_candidate(&anchors, c)).collect(),
    };

    let mut manifest = RunManifest::new("calibrate", json!({ "rate_rule": args.rate_rule.map(|r| r.name()) }));
    let (selected, file) = match &scored {
        Ok(report) => (Some(report.selected), Some(InterpretationFile::from_report(report))),
        Err(_) => (None, None),
    };
    if let Some(f) = &file {
        manifest.interpretation = Some(f.interpretation);
        manifest.calibration = Some(f.status());
        manifest.results = Some(json!({ "best": f.interpretation.to_string(), "max_deviation": f.max_deviation }));
    } else {
        manifest.calibration = Some(json!({ "passed": false, "reason": "no physical candidate" }));
    }
    emit(out, &[table(&results, selected)], manifest, started)?;

    let Some(file) = file else {
        return Err(CliError::NoPhysicalCandidate);
    };
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    std::fs::write(out.join(INTERPRETATION_FILE), text)?;

    let report = scored?;
    println!("best candidate: {}", file.interpretation);
    println!("max deviation:  {:.4} (target {CALIBRATION_TARGET}, fail above {CALIBRATION_FAIL_THRESHOLD})", file.max_deviation);
    for r in &report.best().residuals {
        println!("  {:>3} {:<7} target {:.3} computed {:.4}", r.case, r.quantity.name(), r.target, r.computed);
    }
    if !file.passed {
        return Err(iqme::Error::Calibration(Box::new(report)).into());
    }
    Ok(())
}
