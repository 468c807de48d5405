//! JSON task manifests.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "tasks": [
//!     {
//!       "task_id": "T01",
//!       "tier_label": "Single API call",
//!       "reference_curve": "references/T01.csv",
//!       "parameters": [{ "name": "H0", "value": 67.5 }]
//!     }
//!   ]
//! }
//! ```
//!
//! Reference curve paths are relative to the manifest's directory. Optional
//! top-level keys: `weights`, `aliases`, `callees`, `grammar`, `code_glob`,
//! `output_name`, `thresholds`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sciscore_core::curve::parse_table;
use sciscore_core::{EsrThresholds, ExtractionConfig, ParameterSpec, Registry, TaskSpec, Thresholds};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_CODE_GLOB: &str = "*.py";
pub const DEFAULT_OUTPUT_NAME: &str = "output.csv";
pub const SUPPORTED_GRAMMARS: [&str; 1] = ["python"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestFile {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    #[serde(default)]
    pub tasks: Vec<TaskEntry>,
    /// Extra or re-weighted parameters layered over the built-in registry.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub weights: BTreeMap<String, f64>,
    /// Extra spelling -> canonical name entries.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub aliases: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub callees: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grammar: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code_glob: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Thresholds>,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskEntry {
    pub task_id: String,
    #[serde(default)]
    pub tier_label: String,
    pub reference_curve: String,
    pub parameters: Vec<ParameterEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub esr_coverage_frac: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub esr_points_frac: Option<f64>,
    /// Task prompt; carried along, never interpreted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterEntry {
    pub name: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

/// A loaded, validated manifest with its reference curves in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub path: PathBuf,
    pub registry: Registry,
    pub tasks: Vec<TaskSpec>,
    pub extraction: ExtractionConfig,
    pub code_glob: String,
    pub output_name: String,
    pub thresholds: Thresholds,
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ManifestFile = serde_json::from_str(&text).map_err(|e| Error::ManifestParse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_file(file, path, base)
    }

    /// Validates a parsed manifest; reference paths resolve against `base`.
    pub fn from_file(file: ManifestFile, path: &Path, base: &Path) -> Result<Self> {
        let parse_err = |message: String| Error::ManifestParse {
            path: path.to_path_buf(),
            message,
        };
        if file.schema_version != SCHEMA_VERSION {
            return Err(parse_err(format!(
                "unsupported schema_version {}",
                file.schema_version
            )));
        }
        if let Some(grammar) = &file.grammar {
            if !SUPPORTED_GRAMMARS.contains(&grammar.as_str()) {
                return Err(parse_err(format!("unsupported grammar `{grammar}`")));
            }
        }
        let code_glob = file.code_glob.unwrap_or_else(|| DEFAULT_CODE_GLOB.to_owned());
        glob::Pattern::new(&code_glob).map_err(|e| parse_err(format!("code_glob: {e}")))?;
        let thresholds = file.thresholds.unwrap_or_default();
        validate_thresholds(&thresholds)?;

        let mut registry = Registry::builtin();
        for (name, weight) in &file.weights {
            registry.insert_parameter(name, *weight)?;
        }
        for (alias, canonical) in &file.aliases {
            registry.insert_alias(alias, canonical)?;
        }

        let mut seen = BTreeSet::new();
        let mut tasks = Vec::with_capacity(file.tasks.len());
        for entry in &file.tasks {
            if !seen.insert(entry.task_id.clone()) {
                return Err(parse_err(format!("duplicate task_id `{}`", entry.task_id)));
            }
            tasks.push(load_task(entry, &mut registry, base, &parse_err)?);
        }

        Ok(Self {
            path: path.to_path_buf(),
            registry,
            tasks,
            extraction: file
                .callees
                .map(|callees| ExtractionConfig { callees })
                .unwrap_or_default(),
            code_glob,
            output_name: file.output_name.unwrap_or_else(|| DEFAULT_OUTPUT_NAME.to_owned()),
            thresholds,
        })
    }

    pub fn task(&self, task_id: &str) -> Option<&TaskSpec> {
        self.tasks.iter().find(|t| t.task_id == task_id)
    }

    /// Applies suite-wide ESR overrides to every task.
    pub fn override_esr(&mut self, coverage: Option<f64>, points: Option<f64>) -> Result<()> {
        for task in &mut self.tasks {
            if let Some(c) = coverage {
                task.esr.coverage_frac = c;
            }
            if let Some(p) = points {
                task.esr.points_frac = p;
            }
            validate_esr(&task.esr)?;
        }
        Ok(())
    }
}

fn load_task(
    entry: &TaskEntry,
    registry: &mut Registry,
    base: &Path,
    parse_err: &dyn Fn(String) -> Error,
) -> Result<TaskSpec> {
    let defaults = EsrThresholds::default();
    let esr = EsrThresholds {
        coverage_frac: entry.esr_coverage_frac.unwrap_or(defaults.coverage_frac),
        points_frac: entry.esr_points_frac.unwrap_or(defaults.points_frac),
    };
    validate_esr(&esr)?;

    let mut parameters: Vec<ParameterSpec> = Vec::with_capacity(entry.parameters.len());
    for p in &entry.parameters {
        if !p.value.is_finite() {
            return Err(parse_err(format!(
                "task {}: value of `{}` is not finite",
                entry.task_id, p.name
            )));
        }
        let canonical = match (registry.resolve_alias(&p.name), p.weight) {
            (Some(c), None) => c.to_owned(),
            (Some(c), Some(w)) => {
                let c = c.to_owned();
                registry.insert_parameter(&c, w)?;
                c
            }
            (None, Some(w)) => {
                registry.insert_parameter(&p.name, w)?;
                p.name.clone()
            }
            (None, None) => {
                return Err(parse_err(format!(
                    "task {}: parameter `{}` is not in the registry and has no weight",
                    entry.task_id, p.name
                )))
            }
        };
        if parameters.iter().any(|q| q.canonical_name == canonical) {
            return Err(parse_err(format!(
                "task {}: parameter `{canonical}` listed twice",
                entry.task_id
            )));
        }
        parameters.push(ParameterSpec {
            weight: registry.weight(&canonical).unwrap_or_default(),
            aliases: if p.name == canonical {
                Vec::new()
            } else {
                vec![p.name.clone()]
            },
            canonical_name: canonical,
            reference_value: p.value,
        });
    }
    if parameters.is_empty() {
        return Err(parse_err(format!("task {} has no reference parameters", entry.task_id)));
    }

    let curve_path = base.join(&entry.reference_curve);
    let text = match std::fs::read_to_string(&curve_path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::ReferenceMissing {
                task_id: entry.task_id.clone(),
                path: curve_path,
            })
        }
        Err(e) => return Err(Error::io(curve_path, e)),
    };
    let parsed = parse_table(&text).map_err(|source| Error::InvalidReference {
        task_id: entry.task_id.clone(),
        path: curve_path.clone(),
        source,
    })?;
    if parsed.duplicate_x > 0 {
        log::warn!(
            "task {}: reference curve has {} duplicate x values; kept first",
            entry.task_id,
            parsed.duplicate_x
        );
    }

    Ok(TaskSpec {
        task_id: entry.task_id.clone(),
        tier_label: entry.tier_label.clone(),
        reference_curve: entry.reference_curve.clone(),
        reference: parsed.curve,
        parameters,
        esr,
    })
}

pub fn validate_esr(esr: &EsrThresholds) -> Result<()> {
    for (name, value) in [
        ("esr_coverage_frac", esr.coverage_frac),
        ("esr_points_frac", esr.points_frac),
    ] {
        if !(value > 0.0 && value <= 1.0) {
            return Err(Error::InvalidThreshold {
                name: name.to_owned(),
                value,
                range: "(0, 1]",
            });
        }
    }
    Ok(())
}

pub fn validate_thresholds(t: &Thresholds) -> Result<()> {
    for (name, value) in [
        ("pas", t.pas),
        ("nas", t.nas),
        ("unit_ccc", t.unit_ccc),
        ("unit_nrmse", t.unit_nrmse),
    ] {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidThreshold {
                name: name.to_owned(),
                value,
                range: "[0, 1]",
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::create_dir_all(p.parent().unwrap()).unwrap();
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn aliases_and_weights() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "ref.csv", "x,y\n1,2\n2,3\n3,5\n");
        let m = write(
            dir.path(),
            "m.json",
            r#"{"tasks":[{"task_id":"T1","reference_curve":"ref.csv",
                "parameters":[{"name":"hubble","value":70},{"name":"sigma8","value":0.8,"weight":3}]}]}"#,
        );
        let manifest = Manifest::load(&m).unwrap();
        let t = &manifest.tasks[0];
        assert_eq!(t.parameters[0].canonical_name, "H0");
        assert_eq!(t.parameters[0].weight, 2.0);
        assert_eq!(t.parameters[1].weight, 3.0);
        assert_eq!(t.reference.len(), 3);
        assert_eq!(manifest.output_name, "output.csv");
    }

    #[test]
    fn unknown_parameter_without_weight() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "ref.csv", "1,2\n2,3\n");
        let m = write(
            dir.path(),
            "m.json",
            r#"{"tasks":[{"task_id":"T1","reference_curve":"ref.csv","parameters":[{"name":"zz","value":1}]}]}"#,
        );
        assert!(matches!(Manifest::load(&m), Err(Error::ManifestParse { .. })));
    }

    #[test]
    fn duplicate_task() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "ref.csv", "1,2\n2,3\n");
        let task = r#"{"task_id":"T1","reference_curve":"ref.csv","parameters":[{"name":"H0","value":1}]}"#;
        let m = write(dir.path(), "m.json", &format!(r#"{{"tasks":[{task},{task}]}}"#));
        assert!(matches!(Manifest::load(&m), Err(Error::ManifestParse { .. })));
    }

    #[test]
    fn bad_grammar_and_thresholds() {
        let dir = tempfile::tempdir().unwrap();
        let m = write(dir.path(), "m.json", r#"{"grammar":"julia","tasks":[]}"#);
        assert!(matches!(Manifest::load(&m), Err(Error::ManifestParse { .. })));
        let m = write(dir.path(), "m.json", r#"{"thresholds":{"pas":1.5},"tasks":[]}"#);
        assert!(matches!(Manifest::load(&m), Err(Error::InvalidThreshold { .. })));
    }
}
