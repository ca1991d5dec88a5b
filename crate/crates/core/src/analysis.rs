//! Crossing detection and Mpemba verdicts.

use serde::{Deserialize, Serialize};

use crate::circuit::AveragedCurve;
use crate::error::{Error, Result};
use crate::markov::TrajectoryRecord;

/// Multiple of the combined standard error a final gap must exceed.
pub const NOISE_SIGMAS: f64 = 2.0;
/// Level below which Markov residues and distances are numerically
/// converged. `arccos` near 1 resolves only about `sqrt(eps)`, so the distance
/// curves cannot order states much below this.
pub const MARKOV_RESOLUTION: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePair {
    pub times: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub labels: (String, String),
}

impl CurvePair {
    pub fn new(times: Vec<f64>, a: Vec<f64>, b: Vec<f64>, labels: (&str, &str)) -> Result<Self> {
        if a.len() != times.len() || b.len() != times.len() {
            return Err(Error::LengthMismatch(format!(
                "times {}, a {}, b {}",
                times.len(),
                a.len(),
                b.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::LengthMismatch(format!("need at least 2 samples, got {}", times.len())));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Configuration("times must be strictly increasing".into()));
        }
        Ok(Self { times, a, b, labels: (labels.0.to_string(), labels.1.to_string()) })
    }

    /// Exchanges the roles of `a` and `b`.
    pub fn swapped(&self) -> Self {
        Self {
            times: self.times.clone(),
            a: self.b.clone(),
            b: self.a.clone(),
            labels: (self.labels.1.clone(), self.labels.0.clone()),
        }
    }

    /// Keeps every `factor`-th sample, always including the last one.
    pub fn subsample(&self, factor: usize) -> Result<Self> {
        let n = self.times.len();
        let mut idx: Vec<usize> = (0..n).step_by(factor.max(1)).collect();
        if *idx.last().unwrap() != n - 1 {
            idx.push(n - 1);
        }
        let pick = |v: &[f64]| idx.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Self::new(pick(&self.times), pick(&self.a), pick(&self.b), (&self.labels.0, &self.labels.1))
    }

    /// Drops trailing samples at which both curves are within `floor` of zero.
    /// Such samples carry no ordering information. At least two samples are
    /// kept.
    pub fn trim_converged_tail(&self, floor: f64) -> Result<Self> {
        let resolved = |i: usize| self.a[i].abs() > floor || self.b[i].abs() > floor;
        let keep = (0..self.times.len()).rposition(resolved).map_or(0, |i| i + 1).max(2);
        Self::new(
            self.times[..keep].to_vec(),
            self.a[..keep].to_vec(),
            self.b[..keep].to_vec(),
            (&self.labels.0, &self.labels.1),
        )
    }

    fn gaps(&self) -> Vec<f64> {
        self.a.iter().zip(&self.b).map(|(a, b)| a - b).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    Crossing,
    NoCrossing,
    OrderingViolated,
}

impl VerdictKind {
    pub fn name(self) -> &'static str {
        match self {
            VerdictKind::Crossing => "crossing",
            VerdictKind::NoCrossing => "no_crossing",
            VerdictKind::OrderingViolated => "ordering_violated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpembaVerdict {
    pub kind: VerdictKind,
    pub t_c: Option<f64>,
    /// Crossing: `max |a - b|` over samples after `t_c`. Otherwise the
    /// smallest signed gap `min (a - b)` over the record.
    pub margin: f64,
    /// Labels in verdict order: the first curve starts higher.
    pub labels: (String, String),
    /// Set when the inputs were swapped so the larger curve comes first.
    pub relabeled: bool,
    /// Set when a sampled crossing was rejected by the noise gate.
    pub within_noise: bool,
}

impl MpembaVerdict {
    pub fn is_crossing(&self) -> bool {
        self.kind == VerdictKind::Crossing
    }
}

/// Finds a persistent crossing of `a` below `b`.
///
/// `t_c` is the linear-interpolation root of `a - b` at its final sign
/// change; every sample after it must have `a < b`. The condition is only
/// checked on the sampled grid.
pub fn detect_crossing(pair: &CurvePair) -> Result<MpembaVerdict> {
    let pair = CurvePair::new(pair.times.clone(), pair.a.clone(), pair.b.clone(), (&pair.labels.0, &pair.labels.1))?;
    let gaps = pair.gaps();
    let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let mut verdict = MpembaVerdict {
        kind: VerdictKind::NoCrossing,
        t_c: None,
        margin: min_gap,
        labels: pair.labels.clone(),
        relabeled: false,
        within_noise: false,
    };
    if gaps[0] <= 0.0 {
        verdict.kind = VerdictKind::OrderingViolated;
        return Ok(verdict);
    }
    let last_nonneg = gaps.iter().rposition(|&g| g >= 0.0).expect("gaps[0] > 0");
    if last_nonneg == gaps.len() - 1 {
        return Ok(verdict);
    }
    let (j, k) = (last_nonneg, last_nonneg + 1);
    let frac = gaps[j] / (gaps[j] - gaps[k]);
    verdict.kind = VerdictKind::Crossing;
    verdict.t_c = Some(pair.times[j] + frac * (pair.times[k] - pair.times[j]));
    verdict.margin = gaps[k..].iter().map(|g| g.abs()).fold(0.0, f64::max);
    Ok(verdict)
}

/// [`detect_crossing`] with a noise gate: a crossing stands only if the final
/// gap exceeds `sigmas` combined standard errors.
pub fn detect_crossing_with_noise(pair: &CurvePair, se_a: &[f64], se_b: &[f64], sigmas: f64) -> Result<MpembaVerdict> {
    if se_a.len() != pair.times.len() || se_b.len() != pair.times.len() {
        return Err(Error::LengthMismatch("standard errors do not match the curve grid".into()));
    }
    let mut verdict = detect_crossing(pair)?;
    if verdict.is_crossing() {
        let last = pair.times.len() - 1;
        let gap = (pair.a[last] - pair.b[last]).abs();
        let band = sigmas * (se_a[last].powi(2) + se_b[last].powi(2)).sqrt();
        if gap <= band {
            verdict.kind = VerdictKind::NoCrossing;
            verdict.t_c = None;
            verdict.within_noise = true;
        }
    }
    Ok(verdict)
}

/// Puts the curve that starts higher first, then runs [`detect_crossing`].
pub fn relabeled_verdict(pair: &CurvePair) -> Result<MpembaVerdict> {
    if pair.a.first() >= pair.b.first() {
        detect_crossing(pair)
    } else {
        let mut v = detect_crossing(&pair.swapped())?;
        v.relabeled = true;
        Ok(v)
    }
}

fn check_compatible(a: &TrajectoryRecord, b: &TrajectoryRecord) -> Result<()> {
    if a.metric != b.metric {
        return Err(Error::Configuration(format!("metric mismatch: {} vs {}", a.metric, b.metric)));
    }
    if a.params != b.params {
        return Err(Error::Configuration("records use different model parameters".into()));
    }
    check_grid(a, b)
}

fn check_grid(a: &TrajectoryRecord, b: &TrajectoryRecord) -> Result<()> {
    if a.times.len() != b.times.len() {
        return Err(Error::LengthMismatch(format!("{} vs {} samples", a.times.len(), b.times.len())));
    }
    if a.times.iter().zip(&b.times).any(|(x, y)| (x - y).abs() > 1e-12) {
        return Err(Error::Configuration("records use different time grids".into()));
    }
    Ok(())
}

/// Intrinsic Mpemba verdict on the residues `R(t) = L - l(t)`, up to the
/// point where both have converged below [`MARKOV_RESOLUTION`].
pub fn iqme_verdict(rec_a: &TrajectoryRecord, rec_b: &TrajectoryRecord) -> Result<MpembaVerdict> {
    check_compatible(rec_a, rec_b)?;
    let pair = CurvePair::new(rec_a.times.clone(), rec_a.residue.clone(), rec_b.residue.clone(), ("A", "B"))?;
    relabeled_verdict(&pair.trim_converged_tail(MARKOV_RESOLUTION)?)
}

/// Ordinary Mpemba verdict on the distances `d(t)` to the steady state.
pub fn qme_verdict(rec_a: &TrajectoryRecord, rec_b: &TrajectoryRecord) -> Result<MpembaVerdict> {
    check_compatible(rec_a, rec_b)?;
    let pair = CurvePair::new(rec_a.times.clone(), rec_a.geo.clone(), rec_b.geo.clone(), ("A", "B"))?;
    relabeled_verdict(&pair.trim_converged_tail(MARKOV_RESOLUTION)?)
}

/// Metric-independent criterion: requires `R_sld^A(0) > R_hm^B(0)` and then a
/// persistent crossing of `R_hm^A` below `R_sld^B`.
pub fn universal_iqme_check(
    a_sld: &TrajectoryRecord,
    a_hm: &TrajectoryRecord,
    b_sld: &TrajectoryRecord,
    b_hm: &TrajectoryRecord,
) -> Result<MpembaVerdict> {
    for r in [a_hm, b_sld, b_hm] {
        check_grid(a_sld, r)?;
        if r.params != a_sld.params {
            return Err(Error::Configuration("records use different model parameters".into()));
        }
    }
    let pair = CurvePair::new(a_sld.times.clone(), a_hm.residue.clone(), b_sld.residue.clone(), ("A/hm", "B/sld"))?
        .trim_converged_tail(MARKOV_RESOLUTION)?;
    let gate = a_sld.residue[0] - b_hm.residue[0];
    if gate <= 0.0 {
        return Ok(MpembaVerdict {
            kind: VerdictKind::OrderingViolated,
            t_c: None,
            margin: gate,
            labels: pair.labels,
            relabeled: false,
            within_noise: false,
        });
    }
    detect_crossing(&pair)
}

/// Verdict on two averaged circuit residue curves.
///
/// Both residues vanish identically at the horizon because `L` is read off
/// there, so exact-zero trailing samples are dropped and the noise gate uses
/// the per-trajectory residue standard errors at the last remaining sample.
pub fn circuit_verdict(a: &AveragedCurve, b: &AveragedCurve, labels: (&str, &str)) -> Result<MpembaVerdict> {
    if a.times != b.times {
        return Err(Error::Configuration("averaged curves use different step grids".into()));
    }
    let times: Vec<f64> = a.times.iter().map(|&t| t as f64).collect();
    let pair = CurvePair::new(times, a.residue.clone(), b.residue.clone(), labels)?.trim_converged_tail(0.0)?;
    let cut = pair.times.len();
    let (pair, se_a, se_b, relabeled) = if pair.a[0] >= pair.b[0] {
        (pair, &a.residue_std_err[..cut], &b.residue_std_err[..cut], false)
    } else {
        (pair.swapped(), &b.residue_std_err[..cut], &a.residue_std_err[..cut], true)
    };
    let mut v = detect_crossing_with_noise(&pair, se_a, se_b, NOISE_SIGMAS)?;
    v.relabeled = relabeled;
    Ok(v)
}
