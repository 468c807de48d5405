//! Literature reference tables, as JSON (list of rows) or CSV with columns
//! `task_id,parameter,value,sigma,source`.

use std::path::Path;

use serde::Deserialize;

use sciscore_core::LiteratureReference;

use crate::error::{Error, Result};

/// The bundled table for the four research-style tasks.
pub const BUILTIN_CSV: &str = include_str!("../data/literature.csv");

#[derive(Debug, Deserialize)]
struct Row {
    task_id: String,
    parameter: String,
    value: f64,
    sigma: f64,
    #[serde(default)]
    source: String,
}

impl Row {
    fn into_reference(self) -> Result<LiteratureReference> {
        Ok(LiteratureReference::new(
            &self.task_id,
            &self.parameter,
            self.value,
            self.sigma,
            &self.source,
        )?)
    }
}

pub fn builtin() -> Vec<LiteratureReference> {
    parse_csv(BUILTIN_CSV, Path::new("data/literature.csv")).expect("bundled table is valid")
}

/// Loads a table; `.json` files are read as JSON, anything else as CSV.
pub fn load_literature(path: impl AsRef<Path>) -> Result<Vec<LiteratureReference>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        parse_json(&text, path)
    } else {
        parse_csv(&text, path)
    }
}

fn malformed(path: &Path, message: impl ToString) -> Error {
    Error::ManifestParse {
        path: path.to_path_buf(),
        message: message.to_string(),
    }
}

pub fn parse_json(text: &str, path: &Path) -> Result<Vec<LiteratureReference>> {
    let rows: Vec<Row> = serde_json::from_str(text).map_err(|e| malformed(path, e))?;
    rows.into_iter().map(Row::into_reference).collect()
}

pub fn parse_csv(text: &str, path: &Path) -> Result<Vec<LiteratureReference>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in reader.deserialize::<Row>() {
        out.push(row.map_err(|e| malformed(path, e))?.into_reference()?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use sciscore_core::registry::{builtin_literature, LiteratureError};

    #[test]
    fn bundled_matches_core_table() {
        assert_eq!(builtin(), builtin_literature());
    }

    #[test]
    fn csv_rows() {
        let refs = parse_csv(
            "task_id,parameter,value,sigma,source\nT3,M_br,127,17,Muller\n",
            Path::new("x.csv"),
        )
        .unwrap();
        assert_eq!((refs[0].value, refs[0].sigma), (127.0, 17.0));
    }

    #[test]
    fn zero_sigma_rejected() {
        let err = parse_json(
            r#"[{"task_id":"T1","parameter":"Omega_Lambda","value":0.72,"sigma":0,"source":""}]"#,
            Path::new("x.json"),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::Literature(LiteratureError::NonPositiveSigma { .. })
        ));
    }

    #[test]
    fn malformed_csv() {
        let err = parse_csv("task_id,parameter,value,sigma,source\nT1,x,abc,1,s\n", Path::new("x.csv"));
        assert!(matches!(err, Err(Error::ManifestParse { .. })));
    }
}
