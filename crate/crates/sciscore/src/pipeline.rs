//! Ingest, extract, score and classify.

use std::collections::BTreeSet;
use std::panic::AssertUnwindSafe;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use sciscore_core::metrics::compare_curves;
use sciscore_core::{
    aggregate, check_esr, classify, extract_parameters, param_accuracy, EsrFailure, EsrVerdict,
    MetricBundle, NasScores, ParameterExtraction, SourceFile, SuiteReport, TaskSpec, TrialRecord,
};

use crate::error::{Error, Result};
use crate::ingest::{discover_trials, parse_output, Layout, OutputError, TrialArtifacts};
use crate::manifest::Manifest;

/// Shape of the parsed output table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSummary {
    pub raw_column_count: usize,
    pub numeric_column_count: usize,
    pub points: usize,
    pub header_rows: usize,
    pub skipped_rows: usize,
    pub duplicate_x: usize,
}

/// Everything known about one scored trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialScore {
    pub record: TrialRecord,
    pub esr: EsrVerdict,
    pub extraction: ParameterExtraction,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSummary>,
}

fn read_sources(trial: &TrialArtifacts) -> (Vec<(String, String)>, Vec<String>) {
    let mut sources = Vec::new();
    let mut notes = Vec::new();
    for path in &trial.code_files {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        match std::fs::read_to_string(path) {
            Ok(text) => sources.push((name, text)),
            Err(e) => notes.push(format!("source {name} unreadable: {e}")),
        }
    }
    (sources, notes)
}

/// Runs the full pipeline on one trial. Never fails: every problem with the
/// trial's artifacts is encoded in the returned scores.
pub fn score_trial(trial: &TrialArtifacts, task: &TaskSpec, manifest: &Manifest) -> TrialScore {
    let (sources, mut notes) = read_sources(trial);
    let files: Vec<SourceFile<'_>> = sources
        .iter()
        .map(|(name, text)| SourceFile { name, text })
        .collect();
    let extraction = extract_parameters(&files, &manifest.registry, &manifest.extraction);
    for skipped in &extraction.skipped_files {
        notes.push(format!("source {} skipped: {}", skipped.file, skipped.error));
    }
    // Manifest loading guarantees at least one reference parameter.
    let (pas, eps) = param_accuracy(&extraction, task).unwrap_or_default();

    let mut output = None;
    let (esr, nas) = match &trial.output_file {
        None => (EsrVerdict::failed(EsrFailure::NoOutput), NasScores::ZERO),
        Some(path) => match parse_output(path) {
            Ok(parsed) => {
                output = Some(OutputSummary {
                    raw_column_count: parsed.raw_column_count,
                    numeric_column_count: parsed.numeric_column_count,
                    points: parsed.curve.len(),
                    header_rows: parsed.header_rows,
                    skipped_rows: parsed.skipped_rows,
                    duplicate_x: parsed.duplicate_x,
                });
                if parsed.duplicate_x > 0 {
                    notes.push(format!("collapsed {} duplicate x values", parsed.duplicate_x));
                }
                (
                    check_esr(Some(&parsed.curve), &task.reference, &task.esr),
                    compare_curves(&parsed.curve, &task.reference),
                )
            }
            Err(OutputError::Io(e)) => {
                notes.push(format!("output unreadable: {e}"));
                (EsrVerdict::failed(EsrFailure::Unreadable), NasScores::ZERO)
            }
            Err(OutputError::Curve(e)) => (EsrVerdict::failed(EsrFailure::from(&e)), NasScores::ZERO),
        },
    };

    let metrics = MetricBundle::new(esr.passed, pas, nas, eps);
    let failure = classify(&metrics, &manifest.thresholds);
    let mut reasons: Vec<String> = esr.reasons.iter().map(ToString::to_string).collect();
    reasons.extend(notes);
    TrialScore {
        record: TrialRecord {
            system: trial.system.clone(),
            task: trial.task_id.clone(),
            trial: trial.trial_id.clone(),
            metrics,
            failure,
            reasons,
        },
        esr,
        extraction,
        output,
    }
}

/// A Mode A record for a trial the harness itself failed on.
fn harness_failure(trial: &TrialArtifacts, manifest: &Manifest, reason: String) -> TrialRecord {
    let metrics = MetricBundle::new(false, 0.0, NasScores::ZERO, Default::default());
    TrialRecord {
        system: trial.system.clone(),
        task: trial.task_id.clone(),
        trial: trial.trial_id.clone(),
        failure: classify(&metrics, &manifest.thresholds),
        metrics,
        reasons: vec![reason],
    }
}

#[derive(Debug, Clone, Default)]
pub struct SuiteFilter {
    pub systems: Option<BTreeSet<String>>,
    pub tasks: Option<BTreeSet<String>>,
}

impl SuiteFilter {
    fn admits(&self, trial: &TrialArtifacts) -> bool {
        self.systems.as_ref().is_none_or(|s| s.contains(&trial.system))
            && self.tasks.as_ref().is_none_or(|t| t.contains(&trial.task_id))
    }
}

/// Discovers, filters and scores every trial under `root` with at most
/// `jobs` worker threads. The result does not depend on `jobs`.
pub fn score_suite(
    manifest: &Manifest,
    root: &Path,
    filter: &SuiteFilter,
    jobs: usize,
) -> Result<SuiteReport> {
    let layout = Layout::new(&manifest.code_glob, &manifest.output_name)?;
    let mut unknown = BTreeSet::new();
    let trials: Vec<(TrialArtifacts, &TaskSpec)> = discover_trials(root, &layout)?
        .into_iter()
        .filter(|t| filter.admits(t))
        .filter_map(|t| match manifest.task(&t.task_id) {
            Some(task) => Some((t, task)),
            None => {
                unknown.insert(t.task_id.clone());
                None
            }
        })
        .collect();
    for task in unknown {
        log::warn!("skipping trials of task `{task}`: not in the manifest");
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let records: Vec<TrialRecord> = pool.install(|| {
        trials
            .par_iter()
            .map(|(trial, task)| {
                std::panic::catch_unwind(AssertUnwindSafe(|| score_trial(trial, task, manifest).record))
                    .unwrap_or_else(|panic| {
                        let what = panic
                            .downcast_ref::<&str>()
                            .map(|s| s.to_string())
                            .or_else(|| panic.downcast_ref::<String>().cloned())
                            .unwrap_or_else(|| "unknown".to_owned());
                        harness_failure(trial, manifest, format!("internal error: {what}"))
                    })
            })
            .collect()
    });
    Ok(aggregate(records)?)
}
