use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{steady_state, MarkovParams, ModelInterpretation, DEFAULT_STEPS, DEFAULT_TAU_MAX};
use super::trajectory::total_length_and_distance;
use crate::error::{Error, Result};
use crate::qgeom::{BlochVector, MetricKind};

/// Selection fails outright above this max deviation.
pub const CALIBRATION_FAIL_THRESHOLD: f64 = 0.05;
/// Target max deviation for an accepted calibration.
pub const CALIBRATION_TARGET: f64 = 0.01;

pub const REFERENCE_ALPHA: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseLabel {
    I,
    II,
    III,
    IV,
}

impl CaseLabel {
    pub const ALL: [CaseLabel; 4] = [CaseLabel::I, CaseLabel::II, CaseLabel::III, CaseLabel::IV];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseLabel::I => "i",
            CaseLabel::II => "ii",
            CaseLabel::III => "iii",
            CaseLabel::IV => "iv",
        }
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "i" | "1" => Ok(CaseLabel::I),
            "ii" | "2" => Ok(CaseLabel::II),
            "iii" | "3" => Ok(CaseLabel::III),
            "iv" | "4" => Ok(CaseLabel::IV),
            other => Err(Error::Configuration(format!("unknown case '{other}'"))),
        }
    }
}

/// One published two-state comparison with its reference values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnchorCase {
    pub case: CaseLabel,
    pub alpha: f64,
    pub gamma_prime: f64,
    /// `(y, z)` of state A
    pub a: (f64, f64),
    /// `(y, z)` of state B
    pub b: (f64, f64),
    pub length_a: f64,
    pub length_b: f64,
    pub distance_a: f64,
    pub distance_b: f64,
}

impl AnchorCase {
    pub fn state_a(&self) -> BlochVector {
        BlochVector::yz(self.a.0, self.a.1)
    }

    pub fn state_b(&self) -> BlochVector {
        BlochVector::yz(self.b.0, self.b.1)
    }

    /// `[L_A, L_B, d_A(0), d_B(0)]`
    pub fn targets(&self) -> [f64; 4] {
        [self.length_a, self.length_b, self.distance_a, self.distance_b]
    }
}

/// The four reference cases at alpha = 100.
pub fn reference_anchors() -> Vec<AnchorCase> {
    let case = |case, gamma_prime, a, b, la, lb, da, db| AnchorCase {
        case,
        alpha: REFERENCE_ALPHA,
        gamma_prime,
        a,
        b,
        length_a: la,
        length_b: lb,
        distance_a: da,
        distance_b: db,
    };
    vec![
        case(CaseLabel::I, 0.94, (0.5, 0.0), (0.0, 0.5), 0.890, 1.046, 0.782, 1.046),
        case(CaseLabel::II, 0.52, (-0.95, -0.25), (0.0, 0.0), 1.019, 0.781, 0.663, 0.781),
        case(CaseLabel::III, 0.94, (0.9, 0.0), (0.0, 0.2), 1.214, 0.885, 0.780, 0.885),
        case(CaseLabel::IV, 0.94, (0.0, -0.25), (0.5, 0.25), 0.658, 1.013, 0.658, 0.908),
    ]
}

pub fn reference_case(label: CaseLabel) -> AnchorCase {
    reference_anchors().into_iter().find(|a| a.case == label).expect("all labels present")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorQuantity {
    LengthA,
    LengthB,
    DistanceA,
    DistanceB,
}

impl AnchorQuantity {
    pub const ALL: [AnchorQuantity; 4] =
        [AnchorQuantity::LengthA, AnchorQuantity::LengthB, AnchorQuantity::DistanceA, AnchorQuantity::DistanceB];

    pub fn name(self) -> &'static str {
        match self {
            AnchorQuantity::LengthA => "L_A",
            AnchorQuantity::LengthB => "L_B",
            AnchorQuantity::DistanceA => "d_A(0)",
            AnchorQuantity::DistanceB => "d_B(0)",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnchorResidual {
    pub case: CaseLabel,
    pub quantity: AnchorQuantity,
    pub target: f64,
    pub computed: f64,
}

impl AnchorResidual {
    pub fn residual(&self) -> f64 {
        self.computed - self.target
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateResult {
    pub interpretation: ModelInterpretation,
    /// `None` when physical; otherwise why the candidate was discarded.
    pub rejection: Option<String>,
    pub residuals: Vec<AnchorResidual>,
    pub max_deviation: f64,
}

impl CandidateResult {
    pub fn is_physical(&self) -> bool {
        self.rejection.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub candidates: Vec<CandidateResult>,
    /// Index into `candidates` of the minimum-max-deviation physical candidate.
    pub selected: usize,
}

impl CalibrationReport {
    pub fn best(&self) -> &CandidateResult {
        &self.candidates[self.selected]
    }

    pub fn interpretation(&self) -> ModelInterpretation {
        self.best().interpretation
    }

    pub fn meets_target(&self) -> bool {
        self.best().max_deviation <= CALIBRATION_TARGET
    }
}

/// Computed `[L_A, L_B, d_A(0), d_B(0)]` for one case under `interpretation`.
pub fn evaluate_case(anchor: &AnchorCase, interpretation: ModelInterpretation) -> Result<[f64; 4]> {
    let params = MarkovParams::new(anchor.alpha, anchor.gamma_prime, interpretation)?;
    let (la, da) = total_length_and_distance(anchor.state_a(), &params, MetricKind::Sld, DEFAULT_STEPS, DEFAULT_TAU_MAX)?;
    let (lb, db) = total_length_and_distance(anchor.state_b(), &params, MetricKind::Sld, DEFAULT_STEPS, DEFAULT_TAU_MAX)?;
    Ok([la, lb, da, db])
}

fn physicality(anchors: &[AnchorCase], interpretation: ModelInterpretation) -> Option<String> {
    for anchor in anchors {
        let params = match MarkovParams::new(anchor.alpha, anchor.gamma_prime, interpretation) {
            Ok(p) => p,
            Err(e) => return Some(e.to_string()),
        };
        if let Err(e) = steady_state(&params) {
            return Some(format!("case {}: {e}", anchor.case));
        }
        if let Err(e) = params.generator() {
            return Some(format!("case {}: {e}", anchor.case));
        }
    }
    None
}

/// Physicality check and anchor residuals for one candidate.
pub fn evaluate_candidate(anchors: &[AnchorCase], interpretation: ModelInterpretation) -> CandidateResult {
    if let Some(reason) = physicality(anchors, interpretation) {
        return CandidateResult { interpretation, rejection: Some(reason), residuals: Vec::new(), max_deviation: f64::INFINITY };
    }
    let mut residuals = Vec::with_capacity(anchors.len() * 4);
    for anchor in anchors {
        match evaluate_case(anchor, interpretation) {
            Ok(values) => {
                for ((quantity, target), computed) in AnchorQuantity::ALL.into_iter().zip(anchor.targets()).zip(values) {
                    residuals.push(AnchorResidual { case: anchor.case, quantity, target, computed });
                }
            }
            Err(e) => {
                return CandidateResult {
                    interpretation,
                    rejection: Some(format!("case {}: {e}", anchor.case)),
                    residuals: Vec::new(),
                    max_deviation: f64::INFINITY,
                }
            }
        }
    }
    let max_deviation = residuals.iter().map(|r| r.residual().abs()).fold(0.0, f64::max);
    CandidateResult { interpretation, rejection: None, residuals, max_deviation }
}

/// Scores every candidate in `candidates` against `anchors`, without the
/// pass/fail decision.
pub fn score_candidates(anchors: &[AnchorCase], candidates: &[ModelInterpretation]) -> Result<CalibrationReport> {
    let results: Vec<CandidateResult> = candidates.par_iter().map(|&c| evaluate_candidate(anchors, c)).collect();
    let mut selected: Option<usize> = None;
    for (k, r) in results.iter().enumerate() {
        if !r.is_physical() {
            continue;
        }
        // strict improvement beyond 1e-12 keeps the earlier candidate on ties
        match selected {
            Some(s) if r.max_deviation >= results[s].max_deviation - 1e-12 => {}
            _ => selected = Some(k),
        }
    }
    let selected = selected.ok_or_else(|| Error::Configuration("no physical interpretation candidate".into()))?;
    Ok(CalibrationReport { candidates: results, selected })
}

/// Resolves the model interpretation against published anchors over the
/// 32-candidate grid. Errors with the full report when the best candidate
/// misses by more than [`CALIBRATION_FAIL_THRESHOLD`].
pub fn calibrate(anchors: &[AnchorCase]) -> Result<CalibrationReport> {
    let report = score_candidates(anchors, &ModelInterpretation::grid())?;
    if report.best().max_deviation > CALIBRATION_FAIL_THRESHOLD {
        return Err(Error::Calibration(Box::new(report)));
    }
    Ok(report)
}
