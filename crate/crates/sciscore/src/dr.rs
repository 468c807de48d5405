//! Research-style trials scored against literature values.
//!
//! Layout: `<root>/<task_id>/trial_<k>/results.json`, where the results
//! file is a JSON object `{parameter: central_value}`. A trial is completed
//! when that file exists and parses.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use sciscore_core::recovery::record_qualitative;
use sciscore_core::registry::literature_by_task;
use sciscore_core::{DrTrialReport, LiteratureReference, Rating};

use crate::error::{Error, Result};
use crate::ingest::TRIAL_PREFIX;
use crate::report::to_sorted_json;

pub const RESULTS_FILE: &str = "results.json";
pub const STORE_FILE: &str = "dr_reports.json";
pub const STORE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DrTrial {
    pub task_id: String,
    pub trial_id: String,
    pub results_file: Option<PathBuf>,
    pub log_files: Vec<PathBuf>,
}

fn subdirs(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if let (true, Ok(name)) = (path.is_dir(), entry.file_name().into_string()) {
            out.push((name, path));
        }
    }
    out.sort();
    Ok(out)
}

pub fn discover_dr_trials(root: &Path) -> Result<Vec<DrTrial>> {
    let mut out = Vec::new();
    for (task_id, task_dir) in subdirs(root)? {
        for (trial_id, dir) in subdirs(&task_dir)? {
            if !trial_id.starts_with(TRIAL_PREFIX) {
                continue;
            }
            let results = dir.join(RESULTS_FILE);
            let mut log_files: Vec<PathBuf> = fs::read_dir(&dir)
                .map_err(|e| Error::io(&dir, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "log"))
                .collect();
            log_files.sort();
            out.push(DrTrial {
                task_id: task_id.clone(),
                trial_id,
                results_file: results.is_file().then_some(results),
                log_files,
            });
        }
    }
    Ok(out)
}

/// Reads a results file; `None` when it does not hold a JSON object of
/// finite numbers.
pub fn read_results(path: &Path) -> Option<BTreeMap<String, f64>> {
    let text = fs::read_to_string(path).ok()?;
    let values: BTreeMap<String, f64> = serde_json::from_str(&text).ok()?;
    values.values().all(|v| v.is_finite()).then_some(values)
}

fn scrape_pattern() -> &'static Regex {
    static PATTERN: OnceLock<Regex> = OnceLock::new();
    PATTERN.get_or_init(|| {
        Regex::new(r"(?m)^\s*([A-Za-z_][A-Za-z0-9_]*)\s*[:=]\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)")
            .expect("valid pattern")
    })
}

/// Pulls `name = value` / `name: value` lines out of a free-text log for the
/// given parameter names. Advisory only: scoring reads `results.json`.
pub fn scrape_log(text: &str, parameters: &[&str]) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for cap in scrape_pattern().captures_iter(text) {
        let name = &cap[1];
        if let Some(p) = parameters.iter().find(|p| p.eq_ignore_ascii_case(name)) {
            if let Ok(v) = cap[2].parse::<f64>() {
                out.insert((*p).to_owned(), v);
            }
        }
    }
    out
}

/// Scores every trial under `root` whose task has literature references.
pub fn score_dr(root: &Path, literature: &[LiteratureReference]) -> Result<Vec<DrTrialReport>> {
    let by_task = literature_by_task(literature);
    let mut reports = Vec::new();
    for trial in discover_dr_trials(root)? {
        let Some(refs) = by_task.get(&trial.task_id) else {
            log::warn!("skipping {}/{}: no literature references", trial.task_id, trial.trial_id);
            continue;
        };
        let values = trial.results_file.as_deref().and_then(read_results);
        if values.is_none() {
            let names: Vec<&str> = refs.iter().map(|r| r.parameter.as_str()).collect();
            for log in &trial.log_files {
                if let Ok(text) = fs::read_to_string(log) {
                    let hints = scrape_log(&text, &names);
                    if !hints.is_empty() {
                        log::info!(
                            "{}/{}: no usable {RESULTS_FILE}; {} mentions {hints:?}",
                            trial.task_id,
                            trial.trial_id,
                            log.display()
                        );
                    }
                }
            }
        }
        reports.push(DrTrialReport::score(&trial.task_id, &trial.trial_id, values, refs)?);
    }
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrStore {
    pub schema_version: u32,
    pub reports: Vec<DrTrialReport>,
}

impl DrStore {
    pub fn new(reports: Vec<DrTrialReport>) -> Self {
        Self {
            schema_version: STORE_SCHEMA_VERSION,
            reports,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let store: Self = serde_json::from_str(&text).map_err(|e| Error::ManifestParse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if store.schema_version != STORE_SCHEMA_VERSION {
            return Err(Error::ManifestParse {
                path: path.to_path_buf(),
                message: format!("unsupported schema_version {}", store.schema_version),
            });
        }
        Ok(store)
    }

    /// Writes through a temporary file so readers never see a partial store.
    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, to_sorted_json(self)).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    pub fn rate(&mut self, rating: &RatingEntry) -> Result<()> {
        let pp = rating.pp.parse::<Rating>()?;
        let ft = rating.ft.parse::<Rating>()?;
        let trial_id = normalize_trial_id(&rating.trial_id);
        record_qualitative(&mut self.reports, &rating.task_id, &trial_id, pp, ft, &rating.notes)?;
        Ok(())
    }
}

/// Accepts `3` as shorthand for `trial_3`.
pub fn normalize_trial_id(id: &str) -> String {
    if id.chars().all(|c| c.is_ascii_digit()) && !id.is_empty() {
        format!("{TRIAL_PREFIX}{id}")
    } else {
        id.to_owned()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct RatingEntry {
    pub task_id: String,
    pub trial_id: String,
    #[serde(default = "unrated")]
    pub pp: String,
    #[serde(default = "unrated")]
    pub ft: String,
    #[serde(default)]
    pub notes: String,
}

fn unrated() -> String {
    Rating::Unrated.as_str().to_owned()
}

/// Ratings file: CSV with columns `task_id,trial_id,pp,ft,notes`.
pub fn load_ratings(path: &Path) -> Result<Vec<RatingEntry>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Config(format!("{}: {other:?}", path.display())),
        })?;
    reader
        .deserialize()
        .map(|row| {
            row.map_err(|e| Error::ManifestParse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scraper_reads_assignments() {
        let log = "step 3\nOmega_Lambda = 0.722\nc: 1.19e0\nnote c is small\n";
        let got = scrape_log(log, &["Omega_Lambda", "c"]);
        assert_eq!(got["Omega_Lambda"], 0.722);
        assert_eq!(got["c"], 1.19);
        assert_eq!(got.len(), 2);
    }

    #[test]
    fn trial_shorthand() {
        assert_eq!(normalize_trial_id("0"), "trial_0");
        assert_eq!(normalize_trial_id("trial_2"), "trial_2");
    }

    #[test]
    fn results_must_be_numeric_map() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        fs::write(&p, r#"{"c": 1.19}"#).unwrap();
        assert_eq!(read_results(&p).unwrap()["c"], 1.19);
        fs::write(&p, r#"{"c": "big"}"#).unwrap();
        assert!(read_results(&p).is_none());
        fs::write(&p, "not json").unwrap();
        assert!(read_results(&p).is_none());
    }
}
