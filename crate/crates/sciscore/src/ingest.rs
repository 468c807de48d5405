//! Trial discovery and output parsing.
//!
//! Layout: `<root>/<system>/<task_id>/trial_<k>/` holding source files
//! (matched by a glob) and the output table.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use sciscore_core::curve::parse_table;
use sciscore_core::{CurveError, ParsedOutput};

use crate::error::{Error, Result};

pub const TRIAL_PREFIX: &str = "trial_";

#[derive(Debug, Clone)]
pub struct Layout {
    pub code_glob: glob::Pattern,
    pub output_name: String,
}

impl Layout {
    pub fn new(code_glob: &str, output_name: &str) -> Result<Self> {
        Ok(Self {
            code_glob: glob::Pattern::new(code_glob)
                .map_err(|e| Error::Config(format!("code glob `{code_glob}`: {e}")))?,
            output_name: output_name.to_owned(),
        })
    }
}

impl Default for Layout {
    fn default() -> Self {
        Self::new(
            crate::manifest::DEFAULT_CODE_GLOB,
            crate::manifest::DEFAULT_OUTPUT_NAME,
        )
        .expect("default glob is valid")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialArtifacts {
    pub system: String,
    pub task_id: String,
    pub trial_id: String,
    pub dir: PathBuf,
    /// Source files in lexicographic order, which is also the order in
    /// which repeated parameter assignments are resolved.
    pub code_files: Vec<PathBuf>,
    pub output_file: Option<PathBuf>,
}

fn sorted_entries(dir: &Path) -> Result<Vec<(String, PathBuf, bool)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let Ok(name) = entry.file_name().into_string() else {
            log::warn!("skipping non-UTF-8 path in {}", dir.display());
            continue;
        };
        let path = entry.path();
        let is_dir = path.is_dir();
        out.push((name, path, is_dir));
    }
    out.sort();
    Ok(out)
}

/// Lists every trial under `root`, sorted by (system, task, trial).
/// A trial without an output file is still listed.
pub fn discover_trials(root: &Path, layout: &Layout) -> Result<Vec<TrialArtifacts>> {
    let mut trials = Vec::new();
    for (system, system_dir, is_dir) in sorted_entries(root)? {
        if !is_dir {
            continue;
        }
        for (task_id, task_dir, is_dir) in sorted_entries(&system_dir)? {
            if !is_dir {
                continue;
            }
            for (trial_id, trial_dir, is_dir) in sorted_entries(&task_dir)? {
                if is_dir && trial_id.starts_with(TRIAL_PREFIX) {
                    trials.push(trial_artifacts(&system, &task_id, &trial_id, &trial_dir, layout)?);
                }
            }
        }
    }
    Ok(trials)
}

/// Reads the contents of one trial directory.
pub fn trial_artifacts(
    system: &str,
    task_id: &str,
    trial_id: &str,
    dir: &Path,
    layout: &Layout,
) -> Result<TrialArtifacts> {
    let mut code_files = Vec::new();
    let mut output_file = None;
    for (name, path, is_dir) in sorted_entries(dir)? {
        if is_dir {
            continue;
        }
        if name == layout.output_name {
            output_file = Some(path);
        } else if layout.code_glob.matches(&name) {
            code_files.push(path);
        }
    }
    Ok(TrialArtifacts {
        system: system.to_owned(),
        task_id: task_id.to_owned(),
        trial_id: trial_id.to_owned(),
        dir: dir.to_path_buf(),
        code_files,
        output_file,
    })
}

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Reads an output table: first two numeric columns, sorted by x, duplicate
/// x values collapsed onto their first occurrence.
pub fn parse_output(path: &Path) -> Result<ParsedOutput, OutputError> {
    let bytes = fs::read(path)?;
    let text = String::from_utf8_lossy(&bytes);
    let parsed = parse_table(&text)?;
    if parsed.duplicate_x > 0 {
        log::warn!(
            "{}: collapsed {} duplicate x values",
            path.display(),
            parsed.duplicate_x
        );
    }
    Ok(parsed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn touch(p: &Path, text: &str) {
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, text).unwrap();
    }

    #[test]
    fn discovers_sorted_trials() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        for k in [3, 0, 1] {
            let t = root.join(format!("sys/T01/trial_{k}"));
            touch(&t.join("main.py"), "x = 1\n");
            if k != 1 {
                touch(&t.join("output.csv"), "1,2\n2,3\n");
            }
        }
        touch(&root.join("sys/T01/notes.txt"), "");
        touch(&root.join("sys/T01/trial_0/README.md"), "");
        let trials = discover_trials(root, &Layout::default()).unwrap();
        let ids: Vec<&str> = trials.iter().map(|t| t.trial_id.as_str()).collect();
        assert_eq!(ids, ["trial_0", "trial_1", "trial_3"]);
        assert!(trials[1].output_file.is_none());
        assert_eq!(trials[0].code_files.len(), 1);
    }

    #[test]
    fn empty_and_missing_root() {
        let dir = tempfile::tempdir().unwrap();
        assert!(discover_trials(dir.path(), &Layout::default()).unwrap().is_empty());
        let missing = dir.path().join("nope");
        assert!(matches!(
            discover_trials(&missing, &Layout::default()),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn single_column_output() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        fs::write(&p, "1\n2\n3\n").unwrap();
        assert!(matches!(
            parse_output(&p),
            Err(OutputError::Curve(CurveError::NoNumericColumns { found: 1 }))
        ));
    }
}
