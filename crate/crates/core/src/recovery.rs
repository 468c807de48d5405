//! Parameter recovery against literature values for research-style runs,
//! plus the human-entered plausibility and transparency ratings.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::registry::LiteratureReference;

/// Deviation, in units of the literature sigma, at which a parameter scores 0.
pub const SATURATION_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RecoveryError {
    #[error("no literature references for task `{0}`")]
    NoReferences(String),
    #[error("no report for task `{task_id}` trial `{trial_id}`")]
    UnknownTrial { task_id: String, trial_id: String },
    #[error("unknown rating `{0}` (expected pass, partial, fail or unrated)")]
    UnknownRating(String),
}

/// Score for one parameter; 1 at the reference, 0 from three sigma out.
pub fn parameter_recovery(central: Option<f64>, reference: &LiteratureReference) -> f64 {
    match central {
        Some(v) if v.is_finite() => {
            (1.0 - (v - reference.value).abs() / (SATURATION_SIGMAS * reference.sigma)).max(0.0)
        }
        _ => 0.0,
    }
}

fn lookup<'a>(centrals: &'a BTreeMap<String, f64>, name: &str) -> Option<f64> {
    centrals.get(name).copied().or_else(|| {
        centrals
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| *v)
    })
}

/// Per-parameter scores and their unweighted mean. Parameters missing from
/// `centrals` score 0.
pub fn recovery_score(
    centrals: &BTreeMap<String, f64>,
    refs: &[LiteratureReference],
) -> Result<(BTreeMap<String, f64>, f64), RecoveryError> {
    if refs.is_empty() {
        return Err(RecoveryError::NoReferences(String::new()));
    }
    let per_param: BTreeMap<String, f64> = refs
        .iter()
        .map(|r| (r.parameter.clone(), parameter_recovery(lookup(centrals, &r.parameter), r)))
        .collect();
    let prs = refs
        .iter()
        .map(|r| per_param[&r.parameter])
        .sum::<f64>()
        / refs.len() as f64;
    Ok((per_param, prs))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rating {
    Fail,
    Partial,
    Pass,
    #[default]
    Unrated,
}

impl Rating {
    pub fn symbol(self) -> &'static str {
        match self {
            Rating::Pass => "✓",
            Rating::Partial => "~",
            Rating::Fail => "×",
            Rating::Unrated => "",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Rating::Pass => "pass",
            Rating::Partial => "partial",
            Rating::Fail => "fail",
            Rating::Unrated => "unrated",
        }
    }
}

impl core::str::FromStr for Rating {
    type Err = RecoveryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pass" => Ok(Rating::Pass),
            "partial" => Ok(Rating::Partial),
            "fail" => Ok(Rating::Fail),
            "unrated" | "" => Ok(Rating::Unrated),
            _ => Err(RecoveryError::UnknownRating(s.to_owned())),
        }
    }
}

/// One research-style trial. `central_values` holds whatever central
/// estimate the run reported (median or mean).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrTrialReport {
    pub task_id: String,
    pub trial_id: String,
    pub completed: bool,
    #[serde(default)]
    pub central_values: BTreeMap<String, f64>,
    #[serde(default)]
    pub per_param_r: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prs: Option<f64>,
    #[serde(default)]
    pub pp_rating: Rating,
    #[serde(default)]
    pub ft_rating: Rating,
    #[serde(default)]
    pub notes: String,
}

impl DrTrialReport {
    /// Scores a trial. Incomplete trials carry no PRS.
    pub fn score(
        task_id: &str,
        trial_id: &str,
        central_values: Option<BTreeMap<String, f64>>,
        refs: &[LiteratureReference],
    ) -> Result<Self, RecoveryError> {
        if refs.is_empty() {
            return Err(RecoveryError::NoReferences(task_id.to_owned()));
        }
        let completed = central_values.is_some();
        let central_values = central_values.unwrap_or_default();
        let (per_param_r, prs) = if completed {
            let (r, prs) = recovery_score(&central_values, refs)?;
            (r, Some(prs))
        } else {
            (BTreeMap::new(), None)
        };
        Ok(Self {
            task_id: task_id.to_owned(),
            trial_id: trial_id.to_owned(),
            completed,
            central_values,
            per_param_r,
            prs,
            pp_rating: Rating::Unrated,
            ft_rating: Rating::Unrated,
            notes: String::new(),
        })
    }
}

/// Stores ratings verbatim on an existing report.
pub fn record_qualitative(
    reports: &mut [DrTrialReport],
    task_id: &str,
    trial_id: &str,
    pp: Rating,
    ft: Rating,
    notes: &str,
) -> Result<(), RecoveryError> {
    let report = reports
        .iter_mut()
        .find(|r| r.task_id == task_id && r.trial_id == trial_id)
        .ok_or_else(|| RecoveryError::UnknownTrial {
            task_id: task_id.to_owned(),
            trial_id: trial_id.to_owned(),
        })?;
    report.pp_rating = pp;
    report.ft_rating = ft;
    report.notes = notes.to_owned();
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrSummaryRow {
    pub task_id: String,
    pub completed: usize,
    pub total: usize,
    /// Mean PRS over completed trials; `None` when nothing completed.
    pub prs: Option<f64>,
    pub pp: Rating,
    pub ft: Rating,
}

impl DrSummaryRow {
    pub fn trials_label(&self) -> String {
        alloc::format!("{}/{}", self.completed, self.total)
    }
}

/// Worst rated value wins; unrated trials do not count.
fn task_rating(ratings: impl Iterator<Item = Rating>) -> Rating {
    ratings
        .filter(|r| *r != Rating::Unrated)
        .min()
        .unwrap_or(Rating::Unrated)
}

/// Per-task summary, sorted by task id.
pub fn dr_summary(reports: &[DrTrialReport]) -> Vec<DrSummaryRow> {
    let mut by_task: BTreeMap<&str, Vec<&DrTrialReport>> = BTreeMap::new();
    for r in reports {
        by_task.entry(&r.task_id).or_default().push(r);
    }
    by_task
        .into_iter()
        .map(|(task, trials)| {
            let done: Vec<f64> = trials
                .iter()
                .filter(|t| t.completed)
                .filter_map(|t| t.prs)
                .collect();
            let prs = (!done.is_empty()).then(|| done.iter().sum::<f64>() / done.len() as f64);
            DrSummaryRow {
                task_id: task.to_owned(),
                completed: trials.iter().filter(|t| t.completed).count(),
                total: trials.len(),
                prs,
                pp: task_rating(trials.iter().map(|t| t.pp_rating)),
                ft: task_rating(trials.iter().map(|t| t.ft_rating)),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::builtin_literature;
    use alloc::vec;

    fn refs(task: &str) -> Vec<LiteratureReference> {
        builtin_literature()
            .into_iter()
            .filter(|r| r.task_id == task)
            .collect()
    }

    fn centrals(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|&(k, v)| (k.to_owned(), v)).collect()
    }

    #[test]
    fn identity_and_saturation() {
        let r = LiteratureReference::new("T", "p", 2.0, 0.5, "").unwrap();
        assert_eq!(parameter_recovery(Some(2.0), &r), 1.0);
        assert_eq!(parameter_recovery(Some(3.5), &r), 0.0);
        assert_eq!(parameter_recovery(Some(-10.0), &r), 0.0);
        assert_eq!(parameter_recovery(None, &r), 0.0);
    }

    #[test]
    fn t1_omega_lambda() {
        let (_, prs) = recovery_score(&centrals(&[("Omega_Lambda", 0.722)]), &refs("T1")).unwrap();
        assert!((prs - (1.0 - 0.002 / 0.06)).abs() < 1e-12);
        assert!((prs - 0.9667).abs() < 1e-4);
    }

    #[test]
    fn t2_concentration_and_missing_mass() {
        let (r, prs) = recovery_score(&centrals(&[("c", 1.19)]), &refs("T2")).unwrap();
        assert!((r["c"] - 0.065).abs() < 1e-9);
        assert_eq!(r["log10_M200"], 0.0);
        assert!((prs - 0.0325).abs() < 1e-9);
    }

    #[test]
    fn case_insensitive_names() {
        let (r, _) = recovery_score(&centrals(&[("omega_lambda", 0.72)]), &refs("T1")).unwrap();
        assert_eq!(r["Omega_Lambda"], 1.0);
    }

    #[test]
    fn no_references() {
        assert!(recovery_score(&BTreeMap::new(), &[]).is_err());
        assert!(DrTrialReport::score("T9", "0", None, &[]).is_err());
    }

    #[test]
    fn ratings_parse() {
        assert_eq!("pass".parse::<Rating>().unwrap(), Rating::Pass);
        assert_eq!("Partial".parse::<Rating>().unwrap(), Rating::Partial);
        assert!(matches!(
            "excellent".parse::<Rating>(),
            Err(RecoveryError::UnknownRating(_))
        ));
        assert_eq!(Rating::Unrated.symbol(), "");
        assert_eq!(Rating::Fail.symbol(), "×");
    }

    #[test]
    fn record_and_unknown_trial() {
        let mut reports =
            vec![DrTrialReport::score("T2", "0", Some(centrals(&[("c", 1.19)])), &refs("T2")).unwrap()];
        record_qualitative(&mut reports, "T2", "0", Rating::Fail, Rating::Fail, "unphysical c<2").unwrap();
        assert_eq!(reports[0].pp_rating, Rating::Fail);
        assert_eq!(reports[0].notes, "unphysical c<2");
        assert!(matches!(
            record_qualitative(&mut reports, "T2", "7", Rating::Pass, Rating::Pass, ""),
            Err(RecoveryError::UnknownTrial { .. })
        ));
    }

    #[test]
    fn summary_rows() {
        let t4 = refs("T4");
        let mut reports = vec![
            DrTrialReport::score("T4", "0", Some(centrals(&[("f", 1.06)])), &t4).unwrap(),
        ];
        for k in 1..5 {
            reports.push(DrTrialReport::score("T4", &alloc::format!("{k}"), None, &t4).unwrap());
        }
        let t1 = refs("T1");
        reports.push(DrTrialReport::score("T1", "0", None, &t1).unwrap());
        let rows = dr_summary(&reports);
        assert_eq!(rows[0].task_id, "T1");
        assert_eq!(rows[0].prs, None);
        assert_eq!(rows[1].trials_label(), "1/5");
        assert_eq!(rows[1].prs, Some(0.0));
    }

    #[test]
    fn worst_rating_wins() {
        let r = task_rating([Rating::Pass, Rating::Unrated, Rating::Partial].into_iter());
        assert_eq!(r, Rating::Partial);
        assert_eq!(task_rating([Rating::Unrated].into_iter()), Rating::Unrated);
    }
}
