//! Pooling per-trial results into per-task and per-system statistics.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::classify::{FailureMode, Mode};
use crate::metrics::MetricBundle;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AggregateError {
    #[error("no trials to aggregate")]
    EmptySuite,
    #[error("trial {system}/{task}/{trial} appears more than once")]
    DuplicateTrial {
        system: String,
        task: String,
        trial: String,
    },
}

/// One scored trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub system: String,
    pub task: String,
    pub trial: String,
    pub metrics: MetricBundle,
    pub failure: FailureMode,
    /// Execution-gate failure reasons and harness notes, if any.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reasons: Vec<String>,
}

impl TrialRecord {
    fn key(&self) -> (&str, &str, &str) {
        (&self.system, &self.task, &self.trial)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemMeans {
    pub trials: usize,
    pub esr: f64,
    pub pas: f64,
    pub nas: f64,
    pub final_score: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ModeBreakdown {
    pub counts: [usize; 4],
    pub proportions: [f64; 4],
    /// Trials carrying the unit/normalization flag, any mode.
    pub unit_flagged: usize,
}

impl ModeBreakdown {
    pub fn proportion(&self, mode: Mode) -> f64 {
        self.proportions[mode.index()]
    }

    pub fn count(&self, mode: Mode) -> usize {
        self.counts[mode.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    /// Sorted by `(system, task, trial)`.
    pub per_trial: Vec<TrialRecord>,
    /// system -> task -> mean final score.
    pub per_task_means: BTreeMap<String, BTreeMap<String, f64>>,
    /// Pooled over every trial of the system, not a mean of task means.
    pub per_system_means: BTreeMap<String, SystemMeans>,
    pub mode_proportions: BTreeMap<String, ModeBreakdown>,
}

impl SuiteReport {
    pub fn systems(&self) -> impl Iterator<Item = &str> {
        self.per_system_means.keys().map(String::as_str)
    }

    /// Every task seen under any system, sorted.
    pub fn tasks(&self) -> Vec<&str> {
        let mut tasks: Vec<&str> = self
            .per_task_means
            .values()
            .flat_map(|m| m.keys().map(String::as_str))
            .collect();
        tasks.sort_unstable();
        tasks.dedup();
        tasks
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

/// Pools trial records. Input order does not matter; the output is sorted.
pub fn aggregate(mut trials: Vec<TrialRecord>) -> Result<SuiteReport, AggregateError> {
    if trials.is_empty() {
        return Err(AggregateError::EmptySuite);
    }
    trials.sort_by(|a, b| a.key().cmp(&b.key()));
    if let Some(w) = trials.windows(2).find(|w| w[0].key() == w[1].key()) {
        return Err(AggregateError::DuplicateTrial {
            system: w[0].system.clone(),
            task: w[0].task.clone(),
            trial: w[0].trial.clone(),
        });
    }

    let mut by_system: BTreeMap<&str, Vec<&TrialRecord>> = BTreeMap::new();
    for t in &trials {
        by_system.entry(&t.system).or_default().push(t);
    }

    let mut per_task_means = BTreeMap::new();
    let mut per_system_means = BTreeMap::new();
    let mut mode_proportions = BTreeMap::new();
    for (system, records) in &by_system {
        let mut by_task: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        for r in records {
            by_task.entry(&r.task).or_default().push(r.metrics.final_score);
        }
        per_task_means.insert(
            String::from(*system),
            by_task
                .into_iter()
                .map(|(task, finals)| (String::from(task), mean(finals.into_iter())))
                .collect(),
        );

        per_system_means.insert(
            String::from(*system),
            SystemMeans {
                trials: records.len(),
                esr: mean(records.iter().map(|r| if r.metrics.esr { 1.0 } else { 0.0 })),
                pas: mean(records.iter().map(|r| r.metrics.pas)),
                nas: mean(records.iter().map(|r| r.metrics.nas)),
                final_score: mean(records.iter().map(|r| r.metrics.final_score)),
            },
        );

        let mut breakdown = ModeBreakdown::default();
        for r in records {
            breakdown.counts[r.failure.mode.index()] += 1;
            if r.failure.unit_error_flag {
                breakdown.unit_flagged += 1;
            }
        }
        for m in Mode::ALL {
            breakdown.proportions[m.index()] = breakdown.counts[m.index()] as f64 / records.len() as f64;
        }
        mode_proportions.insert(String::from(*system), breakdown);
    }

    Ok(SuiteReport {
        per_trial: trials,
        per_task_means,
        per_system_means,
        mode_proportions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{classify, Thresholds};
    use crate::metrics::NasScores;
    use alloc::format;
    use alloc::string::ToString;
    use alloc::vec;
    use proptest::prelude::*;

    fn record(system: &str, task: &str, trial: usize, esr: bool, pas: f64, nas: f64) -> TrialRecord {
        let mut metrics = MetricBundle::new(esr, pas, NasScores::from_parts(nas, nas, nas), BTreeMap::new());
        metrics.nas = nas;
        metrics.final_score = crate::metrics::final_score(esr, pas, nas);
        TrialRecord {
            system: system.to_string(),
            task: task.to_string(),
            trial: format!("trial_{trial}"),
            failure: classify(&metrics, &Thresholds::default()),
            metrics,
            reasons: vec![],
        }
    }

    #[test]
    fn empty_suite() {
        assert_eq!(aggregate(vec![]).unwrap_err(), AggregateError::EmptySuite);
    }

    #[test]
    fn duplicate_trial() {
        let r = record("s", "t", 0, true, 1.0, 1.0);
        assert!(matches!(
            aggregate(vec![r.clone(), r]),
            Err(AggregateError::DuplicateTrial { .. })
        ));
    }

    #[test]
    fn single_trial_means() {
        let rep = aggregate(vec![record("s", "t", 0, true, 0.8, 0.6)]).unwrap();
        let m = rep.per_system_means["s"];
        assert_eq!((m.esr, m.pas, m.nas), (1.0, 0.8, 0.6));
        assert_eq!(m.final_score, rep.per_trial[0].metrics.final_score);
        assert_eq!(rep.per_task_means["s"]["t"], m.final_score);
    }

    #[test]
    fn task_mean_of_two() {
        let rep = aggregate(vec![
            record("s", "t", 0, true, 1.0, 1.0),
            record("s", "t", 1, false, 1.0, 1.0),
        ])
        .unwrap();
        assert_eq!(rep.per_task_means["s"]["t"], 0.5);
        assert_eq!(rep.mode_proportions["s"].proportion(Mode::A), 0.5);
    }

    #[test]
    fn ninety_one_percent_mode_a() {
        let trials: Vec<_> = (0..100)
            .map(|i| record("base", &format!("task{:02}", i / 10), i % 10, i >= 91, 1.0, 1.0))
            .collect();
        let rep = aggregate(trials).unwrap();
        assert_eq!(rep.mode_proportions["base"].proportion(Mode::A), 0.91);
    }

    #[test]
    fn mean_of_products() {
        let rep = aggregate(vec![
            record("s", "t", 0, true, 1.0, 0.5),
            record("s", "t", 1, true, 0.5, 1.0),
        ])
        .unwrap();
        let m = rep.per_system_means["s"];
        assert_eq!(m.final_score, 0.5);
        assert_eq!(m.pas * m.nas, 0.5625);
    }

    #[test]
    fn pooled_differs_with_uneven_counts() {
        let rep = aggregate(vec![
            record("s", "t1", 0, true, 1.0, 1.0),
            record("s", "t2", 0, false, 1.0, 1.0),
            record("s", "t2", 1, false, 1.0, 1.0),
        ])
        .unwrap();
        assert!((rep.per_system_means["s"].final_score - 1.0 / 3.0).abs() < 1e-15);
        let task_means: Vec<f64> = rep.per_task_means["s"].values().copied().collect();
        assert_eq!(task_means.iter().sum::<f64>() / 2.0, 0.5);
    }

    proptest! {
        #[test]
        fn uniform_counts_pooled_equals_mean_of_task_means(
            finals in proptest::collection::vec(proptest::collection::vec((any::<bool>(), 0.0f64..=1.0, 0.0f64..=1.0), 3), 1..6)
        ) {
            let mut trials = vec![];
            for (ti, task) in finals.iter().enumerate() {
                for (k, &(esr, pas, nas)) in task.iter().enumerate() {
                    trials.push(record("s", &format!("t{ti}"), k, esr, pas, nas));
                }
            }
            let rep = aggregate(trials).unwrap();
            let tm = &rep.per_task_means["s"];
            let mean_of_means = tm.values().sum::<f64>() / tm.len() as f64;
            prop_assert!((rep.per_system_means["s"].final_score - mean_of_means).abs() < 1e-12);
            let row = &rep.mode_proportions["s"];
            prop_assert!((row.proportions.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let again = aggregate(rep.per_trial.clone()).unwrap();
            prop_assert_eq!(again, rep);
        }
    }
}
