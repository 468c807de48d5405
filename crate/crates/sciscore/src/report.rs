//! Report files. Numbers in CSV and Markdown use four decimals; JSON keeps
//! full precision with sorted keys.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sciscore_core::recovery::{dr_summary, DrSummaryRow};
use sciscore_core::{DrTrialReport, Mode, SuiteReport};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const SUITE_REPORT_JSON: &str = "suite_report.json";
pub const SUMMARY_CSV: &str = "summary_by_system.csv";
pub const HEATMAP_CSV: &str = "heatmap.csv";
pub const FAILURE_MODES_CSV: &str = "failure_modes.csv";
pub const TRIALS_CSV: &str = "trials.csv";
pub const SUMMARY_MD: &str = "summary.md";
pub const DR_SUMMARY_MD: &str = "dr_summary.md";
pub const DR_SUMMARY_CSV: &str = "dr_summary.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Markdown,
    All,
}

impl Format {
    fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::All)
    }
    fn json(self) -> bool {
        matches!(self, Format::Json | Format::All)
    }
    fn markdown(self) -> bool {
        matches!(self, Format::Markdown | Format::All)
    }
}

fn f4(x: f64) -> String {
    format!("{x:.4}")
}

/// On-disk form of `suite_report.json`. Sections that are empty are left
/// out rather than written as nulls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReportFile {
    pub schema_version: u32,
    #[serde(flatten)]
    pub suite: SuiteReport,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dr_reports: Vec<DrTrialReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dr_summary: Vec<DrSummaryRow>,
}

impl SuiteReportFile {
    pub fn new(suite: SuiteReport, dr_reports: Vec<DrTrialReport>) -> Self {
        let dr_summary = dr_summary(&dr_reports);
        Self {
            schema_version: SCHEMA_VERSION,
            suite,
            dr_reports,
            dr_summary,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: Self = serde_json::from_str(&text).map_err(|e| Error::ManifestParse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::ManifestParse {
                path: path.to_path_buf(),
                message: format!("unsupported schema_version {}", file.schema_version),
            });
        }
        Ok(file)
    }
}

/// Serializes with keys sorted at every level.
pub fn to_sorted_json<T: Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("report types serialize");
    let mut text = serde_json::to_string_pretty(&value).expect("values serialize");
    text.push('\n');
    text
}

pub fn suite_json(report: &SuiteReportFile) -> String {
    to_sorted_json(report)
}

pub fn summary_csv(suite: &SuiteReport) -> String {
    let mut out = String::from("system,trials,esr,pas,nas,final\n");
    for (system, m) in &suite.per_system_means {
        let _ = writeln!(
            out,
            "{system},{},{},{},{},{}",
            m.trials,
            f4(m.esr),
            f4(m.pas),
            f4(m.nas),
            f4(m.final_score)
        );
    }
    out
}

/// Mean final score, systems as rows and tasks as columns. Cells for
/// tasks a system never attempted are empty.
pub fn heatmap_csv(suite: &SuiteReport) -> String {
    let tasks = suite.tasks();
    let mut out = String::from("system");
    for t in &tasks {
        out.push(',');
        out.push_str(t);
    }
    out.push('\n');
    for (system, means) in &suite.per_task_means {
        out.push_str(system);
        for t in &tasks {
            out.push(',');
            if let Some(v) = means.get(*t) {
                out.push_str(&f4(*v));
            }
        }
        out.push('\n');
    }
    out
}

pub fn failure_modes_csv(suite: &SuiteReport) -> String {
    let mut out = String::from("system,trials,count_A,count_B,count_C,count_D,A,B,C,D,unit_flagged\n");
    for (system, b) in &suite.mode_proportions {
        let total: usize = b.counts.iter().sum();
        let _ = write!(out, "{system},{total}");
        for m in Mode::ALL {
            let _ = write!(out, ",{}", b.count(m));
        }
        for m in Mode::ALL {
            let _ = write!(out, ",{}", f4(b.proportion(m)));
        }
        let _ = writeln!(out, ",{}", b.unit_flagged);
    }
    out
}

pub fn trials_csv(suite: &SuiteReport) -> String {
    let mut out =
        String::from("system,task,trial,esr,pas,s_nrmse,s_smape,s_ccc,nas,final,mode,unit_flag,subclass\n");
    for r in &suite.per_trial {
        let m = &r.metrics;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.system,
            r.task,
            r.trial,
            u8::from(m.esr),
            f4(m.pas),
            f4(m.s_nrmse),
            f4(m.s_smape),
            f4(m.s_ccc),
            f4(m.nas),
            f4(m.final_score),
            r.failure.mode,
            u8::from(r.failure.unit_error_flag),
            r.failure.subclass().unwrap_or("")
        );
    }
    out
}

pub fn summary_md(suite: &SuiteReport) -> String {
    let mut out = String::from("| System | Trials | ESR | PAS | NAS | Final | A | B | C | D |\n");
    out.push_str("|---|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n");
    for (system, m) in &suite.per_system_means {
        let _ = write!(
            out,
            "| {system} | {} | {} | {} | {} | {} |",
            m.trials,
            f4(m.esr),
            f4(m.pas),
            f4(m.nas),
            f4(m.final_score)
        );
        if let Some(b) = suite.mode_proportions.get(system) {
            for mode in Mode::ALL {
                let _ = write!(out, " {} |", f4(b.proportion(mode)));
            }
        }
        out.push('\n');
    }
    out
}

/// Research-task table: trials completed, PRS, plausibility, transparency.
/// PRS is shown with two decimals, as in published summary tables.
pub fn dr_summary_md(rows: &[DrSummaryRow]) -> String {
    let mut out = String::from("| Task | Trials | PRS | PP | FT |\n|---|:---:|:---:|:---:|:---:|\n");
    for r in rows {
        let prs = r.prs.map_or_else(|| "n/a".to_owned(), |p| format!("{p:.2}"));
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} |",
            r.task_id,
            r.trials_label(),
            prs,
            r.pp.symbol(),
            r.ft.symbol()
        );
    }
    out
}

pub fn dr_summary_csv(rows: &[DrSummaryRow]) -> String {
    let mut out = String::from("task_id,completed,total,prs,pp,ft\n");
    for r in rows {
        let prs = r.prs.map(f4).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.task_id,
            r.completed,
            r.total,
            prs,
            r.pp.as_str(),
            r.ft.as_str()
        );
    }
    out
}

fn write_file(dir: &Path, name: &str, text: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

/// Writes the requested report files into `dir` and returns their paths.
pub fn emit_reports(report: &SuiteReportFile, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let suite = &report.suite;
    if format.json() {
        write_file(dir, SUITE_REPORT_JSON, &suite_json(report), &mut written)?;
    }
    if format.csv() {
        write_file(dir, SUMMARY_CSV, &summary_csv(suite), &mut written)?;
        write_file(dir, HEATMAP_CSV, &heatmap_csv(suite), &mut written)?;
        write_file(dir, FAILURE_MODES_CSV, &failure_modes_csv(suite), &mut written)?;
        write_file(dir, TRIALS_CSV, &trials_csv(suite), &mut written)?;
    }
    if format.markdown() {
        write_file(dir, SUMMARY_MD, &summary_md(suite), &mut written)?;
    }
    if !report.dr_summary.is_empty() {
        written.extend(emit_dr_summary(&report.dr_summary, dir, format)?);
    }
    Ok(written)
}

pub fn emit_dr_summary(rows: &[DrSummaryRow], dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    if format.markdown() {
        write_file(dir, DR_SUMMARY_MD, &dr_summary_md(rows), &mut written)?;
    }
    if format.csv() {
        write_file(dir, DR_SUMMARY_CSV, &dr_summary_csv(rows), &mut written)?;
    }
    Ok(written)
}
