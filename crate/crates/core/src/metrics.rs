//! Parameter accuracy, numerical accuracy and the combined trial score.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::extract::ParameterExtraction;
use crate::registry::TaskSpec;

/// Guards the relative parameter error against a zero reference value.
pub const DELTA: f64 = 1e-12;

pub const W_NRMSE: f64 = 0.2;
pub const W_SMAPE: f64 = 0.3;
pub const W_CCC: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("task has no reference parameters")]
    NoReferenceParameters,
    #[error("candidate and reference x-ranges do not overlap")]
    NoOverlap,
    #[error("need at least two aligned pairs, got {0}")]
    TooFewPairs(usize),
}

/// Saturated relative error of one parameter, `None` meaning omitted.
pub fn param_error(extracted: Option<f64>, reference: f64) -> f64 {
    match extracted {
        Some(v) if v.is_finite() => ((v - reference).abs() / (reference.abs() + DELTA)).min(1.0),
        _ => 1.0,
    }
}

/// Weighted parameter accuracy over the task's reference parameters.
/// Extracted parameters the task does not reference are ignored.
pub fn param_accuracy(
    extraction: &ParameterExtraction,
    task: &TaskSpec,
) -> Result<(f64, BTreeMap<String, f64>), MetricError> {
    if task.parameters.is_empty() {
        return Err(MetricError::NoReferenceParameters);
    }
    let mut eps = BTreeMap::new();
    let mut weighted = 0.0;
    let mut total = 0.0;
    for p in &task.parameters {
        let e = param_error(
            extraction.values.get(&p.canonical_name).copied(),
            p.reference_value,
        );
        weighted += p.weight * e;
        total += p.weight;
        eps.insert(p.canonical_name.clone(), e);
    }
    Ok(((1.0 - weighted / total).clamp(0.0, 1.0), eps))
}

/// Candidate values linearly interpolated at the reference grid points that
/// fall inside the candidate's x-span.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPairs {
    pub candidate: Vec<f64>,
    pub reference: Vec<f64>,
}

impl AlignedPairs {
    pub fn len(&self) -> usize {
        self.reference.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reference.is_empty()
    }
}

/// Aligns the candidate onto the reference grid. No extrapolation: reference
/// points outside the candidate span are dropped.
pub fn interpolate_to_reference(
    candidate: &Curve,
    reference: &Curve,
) -> Result<AlignedPairs, MetricError> {
    let (cx, cy) = (candidate.xs(), candidate.ys());
    let (lo, hi) = (candidate.x_min(), candidate.x_max());
    let mut out = AlignedPairs {
        candidate: Vec::new(),
        reference: Vec::new(),
    };
    for (x, y_ref) in reference.points() {
        if x < lo || x > hi {
            continue;
        }
        // first index with cx[j] >= x; j >= 1 unless x == lo
        let j = cx.partition_point(|&v| v < x);
        let y = if cx[j] == x {
            cy[j]
        } else {
            let (x0, x1, y0, y1) = (cx[j - 1], cx[j], cy[j - 1], cy[j]);
            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        };
        out.candidate.push(y);
        out.reference.push(y_ref);
    }
    if out.is_empty() {
        return Err(MetricError::NoOverlap);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NasScores {
    pub s_nrmse: f64,
    pub s_smape: f64,
    pub s_ccc: f64,
    pub nas: f64,
}

impl NasScores {
    pub const ZERO: Self = Self {
        s_nrmse: 0.0,
        s_smape: 0.0,
        s_ccc: 0.0,
        nas: 0.0,
    };

    pub fn from_parts(s_nrmse: f64, s_smape: f64, s_ccc: f64) -> Self {
        Self {
            s_nrmse,
            s_smape,
            s_ccc,
            nas: W_NRMSE * s_nrmse + W_SMAPE * s_smape + W_CCC * s_ccc,
        }
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn nrmse_score(candidate: &[f64], reference: &[f64]) -> f64 {
    let n = reference.len() as f64;
    let mse = candidate
        .iter()
        .zip(reference)
        .map(|(c, r)| (c - r) * (c - r))
        .sum::<f64>()
        / n;
    let rmse = libm::sqrt(mse);
    let (lo, hi) = reference
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    if range == 0.0 {
        // constant reference: only an exact match scores
        return if rmse == 0.0 { 1.0 } else { 0.0 };
    }
    (1.0 - rmse / range).clamp(0.0, 1.0)
}

pub fn smape_score(candidate: &[f64], reference: &[f64]) -> f64 {
    let total: f64 = candidate
        .iter()
        .zip(reference)
        .map(|(&c, &r)| {
            let denom = (c.abs() + r.abs()) / 2.0;
            if denom == 0.0 {
                0.0
            } else {
                (c - r).abs() / denom
            }
        })
        .sum();
    (1.0 - total / reference.len() as f64).clamp(0.0, 1.0)
}

/// Lin's concordance correlation with population moments.
pub fn ccc_score(candidate: &[f64], reference: &[f64]) -> f64 {
    let (mc, mr) = (mean(candidate), mean(reference));
    let n = reference.len() as f64;
    let (mut var_c, mut var_r, mut cov) = (0.0, 0.0, 0.0);
    for (&c, &r) in candidate.iter().zip(reference) {
        var_c += (c - mc) * (c - mc);
        var_r += (r - mr) * (r - mr);
        cov += (c - mc) * (r - mr);
    }
    let denom = (var_c + var_r) / n + (mc - mr) * (mc - mr);
    if denom == 0.0 {
        // both series constant with equal means, i.e. identical
        return 1.0;
    }
    (2.0 * cov / n / denom).clamp(0.0, 1.0)
}

/// NRMSE, SMAPE and CCC sub-scores over aligned pairs, and their blend.
pub fn nas_scores(pairs: &AlignedPairs) -> Result<NasScores, MetricError> {
    if pairs.len() < 2 {
        return Err(MetricError::TooFewPairs(pairs.len()));
    }
    let (c, r) = (&pairs.candidate[..], &pairs.reference[..]);
    Ok(NasScores::from_parts(
        nrmse_score(c, r),
        smape_score(c, r),
        ccc_score(c, r),
    ))
}

/// Aligns and scores in one step; any alignment failure scores zero.
pub fn compare_curves(candidate: &Curve, reference: &Curve) -> NasScores {
    interpolate_to_reference(candidate, reference)
        .and_then(|pairs| nas_scores(&pairs))
        .unwrap_or(NasScores::ZERO)
}

/// Multiplicative score, zeroed when the execution gate fails.
pub fn final_score(esr: bool, pas: f64, nas: f64) -> f64 {
    if esr {
        pas * nas
    } else {
        0.0
    }
}

/// Everything computed for one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricBundle {
    pub esr: bool,
    pub pas: f64,
    pub s_nrmse: f64,
    pub s_smape: f64,
    pub s_ccc: f64,
    pub nas: f64,
    pub final_score: f64,
    pub per_param_eps: BTreeMap<String, f64>,
}

impl MetricBundle {
    pub fn new(esr: bool, pas: f64, scores: NasScores, per_param_eps: BTreeMap<String, f64>) -> Self {
        Self {
            esr,
            pas,
            s_nrmse: scores.s_nrmse,
            s_smape: scores.s_smape,
            s_ccc: scores.s_ccc,
            nas: scores.nas,
            final_score: final_score(esr, pas, scores.nas),
            per_param_eps,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::esr::EsrThresholds;
    use crate::registry::ParameterSpec;
    use alloc::string::ToString;
    use alloc::vec;

    fn pairs(c: &[f64], r: &[f64]) -> AlignedPairs {
        AlignedPairs {
            candidate: c.to_vec(),
            reference: r.to_vec(),
        }
    }

    fn task(params: &[(&str, f64, f64)]) -> TaskSpec {
        TaskSpec {
            task_id: "t".into(),
            tier_label: String::new(),
            reference_curve: String::new(),
            reference: Curve::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap(),
            parameters: params
                .iter()
                .map(|&(n, v, w)| ParameterSpec {
                    canonical_name: n.to_string(),
                    weight: w,
                    aliases: vec![],
                    reference_value: v,
                })
                .collect(),
            esr: EsrThresholds::default(),
        }
    }

    #[test]
    fn pas_half_when_one_of_two_missing() {
        let t = task(&[("H0", 70.0, 2.0), ("ns", 0.96, 2.0)]);
        let mut ex = ParameterExtraction::default();
        ex.values.insert("H0".into(), 70.0);
        ex.values.insert("sigma8".into(), 0.8);
        let (pas, eps) = param_accuracy(&ex, &t).unwrap();
        assert_eq!(pas, 0.5);
        assert_eq!(eps["H0"], 0.0);
        assert_eq!(eps["ns"], 1.0);
        assert!(!eps.contains_key("sigma8"));
    }

    #[test]
    fn pas_extremes() {
        let t = task(&[("H0", 67.5, 2.0), ("tau", 0.054, 1.0), ("omk", 0.0, 1.5)]);
        let (pas, _) = param_accuracy(&ParameterExtraction::default(), &t).unwrap();
        assert_eq!(pas, 0.0);
        let mut ex = ParameterExtraction::default();
        for p in &t.parameters {
            ex.values.insert(p.canonical_name.clone(), p.reference_value);
        }
        assert_eq!(param_accuracy(&ex, &t).unwrap().0, 1.0);
        assert_eq!(
            param_accuracy(&ex, &task(&[])).unwrap_err(),
            MetricError::NoReferenceParameters
        );
    }

    #[test]
    fn zero_reference_uses_delta() {
        assert_eq!(param_error(Some(0.0), 0.0), 0.0);
        assert_eq!(param_error(Some(1e-3), 0.0), 1.0);
        assert_eq!(param_error(None, 0.0), 1.0);
        assert!((param_error(Some(66.0), 67.5) - 1.5 / (67.5 + DELTA)).abs() < 1e-15);
    }

    #[test]
    fn identity_scores_one() {
        let y = [1.0, 4.0, -2.0, 0.0];
        let s = nas_scores(&pairs(&y, &y)).unwrap();
        assert_eq!(s, NasScores::from_parts(1.0, 1.0, 1.0));
        assert_eq!(s.nas, 1.0);
    }

    #[test]
    fn constant_offset_ccc() {
        let r = [0.0, 1.0, 2.0];
        let c = [1.0, 2.0, 3.0];
        assert!((ccc_score(&c, &r) - 4.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn doubled_smape() {
        let r = [1.0, 2.0, 5.0, 0.3];
        let c: Vec<f64> = r.iter().map(|v| 2.0 * v).collect();
        assert!((smape_score(&c, &r) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_reference_range() {
        let r = [3.0, 3.0, 3.0];
        assert_eq!(nrmse_score(&r, &r), 1.0);
        assert_eq!(nrmse_score(&[3.0, 3.0, 3.1], &r), 0.0);
        assert_eq!(ccc_score(&r, &r), 1.0);
        assert_eq!(smape_score(&[0.0, 0.0], &[0.0, 0.0]), 1.0);
    }

    #[test]
    fn anticorrelated_ccc_clamps_to_zero() {
        assert_eq!(ccc_score(&[3.0, 2.0, 1.0], &[1.0, 2.0, 3.0]), 0.0);
    }

    #[test]
    fn interpolation_identity_and_disjoint() {
        let r = Curve::new(vec![0.0, 1.0, 2.0], vec![5.0, 6.0, 8.0]).unwrap();
        let p = interpolate_to_reference(&r, &r).unwrap();
        assert_eq!(p.candidate, r.ys());
        let far = Curve::new(vec![5.0, 6.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(
            interpolate_to_reference(&far, &r).unwrap_err(),
            MetricError::NoOverlap
        );
        assert_eq!(compare_curves(&far, &r), NasScores::ZERO);
    }

    #[test]
    fn interpolation_excludes_points_outside_candidate() {
        let r = Curve::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let c = Curve::new(vec![0.5, 2.5], vec![10.0, 30.0]).unwrap();
        let p = interpolate_to_reference(&c, &r).unwrap();
        assert_eq!(p.reference, vec![1.0, 2.0]);
        assert_eq!(p.candidate, vec![15.0, 25.0]);
    }

    #[test]
    fn final_score_gate() {
        assert_eq!(final_score(false, 1.0, 1.0), 0.0);
        assert_eq!(final_score(true, 1.0, 0.0), 0.0);
        assert!((final_score(true, 0.95, 0.86) - 0.817).abs() < 1e-12);
    }
}
