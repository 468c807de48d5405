//! Numeric curves and the tolerant table reader used for agent output files.

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// Minimum share of data rows that must parse as finite reals for a column
/// to count as numeric.
pub const NUMERIC_COLUMN_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CurveError {
    #[error("fewer than two numeric columns (found {found})")]
    NoNumericColumns { found: usize },
    #[error("output contains no data rows")]
    EmptyOutput,
    #[error("curve needs at least two distinct x values (found {found})")]
    TooFewPoints { found: usize },
    #[error("xs and ys differ in length ({xs} vs {ys})")]
    LengthMismatch { xs: usize, ys: usize },
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("x values must be strictly increasing (index {index})")]
    NotIncreasing { index: usize },
}

/// Ordered `(x, y)` samples with strictly increasing, finite `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Curve {
    /// Builds a curve from already-sorted samples.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self, CurveError> {
        if xs.len() != ys.len() {
            return Err(CurveError::LengthMismatch {
                xs: xs.len(),
                ys: ys.len(),
            });
        }
        if xs.len() < 2 {
            return Err(CurveError::TooFewPoints { found: xs.len() });
        }
        for (index, (x, y)) in xs.iter().zip(&ys).enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(CurveError::NonFinite { index });
            }
        }
        if let Some(index) = xs.windows(2).position(|w| w[1] <= w[0]) {
            return Err(CurveError::NotIncreasing { index: index + 1 });
        }
        Ok(Self { xs, ys })
    }

    /// Sorts arbitrary samples by `x` (stable) and keeps the first sample of
    /// every run of equal `x`. Returns the curve and the number of dropped
    /// duplicates.
    pub fn from_unsorted(points: Vec<(f64, f64)>) -> Result<(Self, usize), CurveError> {
        let mut points = points;
        if let Some(index) = points
            .iter()
            .position(|(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err(CurveError::NonFinite { index });
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total = points.len();
        points.dedup_by(|later, earlier| later.0 == earlier.0);
        let dropped = total - points.len();
        let (xs, ys) = points.into_iter().unzip();
        Ok((Self::new(xs, ys)?, dropped))
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    /// Always false; a curve holds at least two points.
    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_max(&self) -> f64 {
        self.xs[self.xs.len() - 1]
    }

    pub fn x_span(&self) -> f64 {
        self.x_max() - self.x_min()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    /// Applies `f` to every y value, keeping the grid.
    pub fn map_y(&self, f: impl Fn(f64) -> f64) -> Result<Self, CurveError> {
        Self::new(self.xs.clone(), self.ys.iter().map(|&y| f(y)).collect())
    }
}

/// Result of reading a candidate output table.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedOutput {
    pub curve: Curve,
    /// Widest row seen, counted in fields.
    pub raw_column_count: usize,
    pub numeric_column_count: usize,
    pub header_rows: usize,
    /// Data rows skipped because x or y failed to parse.
    pub skipped_rows: usize,
    /// Rows dropped because their x repeated an earlier row.
    pub duplicate_x: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Delimiter {
    Comma,
    Tab,
    Whitespace,
}

impl Delimiter {
    fn sniff(lines: &[&str]) -> Self {
        let majority = |c: char| lines.iter().filter(|l| l.contains(c)).count() * 2 > lines.len();
        if majority(',') {
            Delimiter::Comma
        } else if majority('\t') {
            Delimiter::Tab
        } else {
            Delimiter::Whitespace
        }
    }

    fn split<'a>(self, line: &'a str) -> Vec<&'a str> {
        match self {
            Delimiter::Comma => line.split(',').map(str::trim).collect(),
            Delimiter::Tab => line.split('\t').map(str::trim).collect(),
            Delimiter::Whitespace => line.split_whitespace().collect(),
        }
    }
}

fn parse_real(field: &str) -> Option<f64> {
    let field = field.trim().trim_matches('"');
    if field.is_empty() {
        return None;
    }
    field.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads a delimited text table and returns its first two numeric columns as
/// a curve.
///
/// Blank lines and `#` comment lines are ignored. Leading rows with no numeric
/// field are treated as headers. A column is numeric when at
/// least [`NUMERIC_COLUMN_FRACTION`] of the data rows parse as finite reals
/// in it.
pub fn parse_table(text: &str) -> Result<ParsedOutput, CurveError> {
    let lines: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    if lines.is_empty() {
        return Err(CurveError::EmptyOutput);
    }
    let delimiter = Delimiter::sniff(&lines);
    let rows: Vec<Vec<&str>> = lines.iter().map(|l| delimiter.split(l)).collect();
    let raw_column_count = rows.iter().map(Vec::len).max().unwrap_or(0);

    let header_rows = rows
        .iter()
        .take_while(|row| row.iter().all(|f| parse_real(f).is_none()))
        .count();
    let data = &rows[header_rows..];
    if data.is_empty() {
        return Err(CurveError::EmptyOutput);
    }

    let numeric_columns: Vec<usize> = (0..raw_column_count)
        .filter(|&col| {
            let ok = data
                .iter()
                .filter(|row| row.get(col).and_then(|f| parse_real(f)).is_some())
                .count();
            ok as f64 >= NUMERIC_COLUMN_FRACTION * data.len() as f64
        })
        .collect();
    if numeric_columns.len() < 2 {
        return Err(CurveError::NoNumericColumns {
            found: numeric_columns.len(),
        });
    }
    let (xc, yc) = (numeric_columns[0], numeric_columns[1]);

    let mut points = Vec::with_capacity(data.len());
    let mut skipped_rows = 0;
    for row in data {
        match (
            row.get(xc).and_then(|f| parse_real(f)),
            row.get(yc).and_then(|f| parse_real(f)),
        ) {
            (Some(x), Some(y)) => points.push((x, y)),
            _ => skipped_rows += 1,
        }
    }
    let found = points.len();
    let (curve, duplicate_x) = Curve::from_unsorted(points).map_err(|e| match e {
        CurveError::TooFewPoints { .. } => CurveError::TooFewPoints { found },
        other => other,
    })?;
    Ok(ParsedOutput {
        curve,
        raw_column_count,
        numeric_column_count: numeric_columns.len(),
        header_rows,
        skipped_rows,
        duplicate_x,
    })
}

/// Renders a curve as a two-column CSV with a header row.
pub fn to_csv(curve: &Curve, x_label: &str, y_label: &str) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(out, "{x_label},{y_label}");
    for (x, y) in curve.points() {
        let _ = writeln!(out, "{x:e},{y:e}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    #[test]
    fn header_and_rows() {
        let mut text = String::from("ell,Dl\n");
        for i in 0..2500 {
            text.push_str(&format!("{},{}\n", i + 2, (i as f64).sin()));
        }
        let parsed = parse_table(&text).unwrap();
        assert_eq!(parsed.curve.len(), 2500);
        assert_eq!(parsed.header_rows, 1);
        assert_eq!(parsed.numeric_column_count, 2);
    }

    #[test]
    fn single_column_is_rejected() {
        let err = parse_table("x\n1\n2\n3\n").unwrap_err();
        assert_eq!(err, CurveError::NoNumericColumns { found: 1 });
    }

    #[test]
    fn empty_and_header_only() {
        assert_eq!(parse_table("").unwrap_err(), CurveError::EmptyOutput);
        assert_eq!(parse_table("# comment\n\n").unwrap_err(), CurveError::EmptyOutput);
        assert_eq!(parse_table("a,b\n").unwrap_err(), CurveError::EmptyOutput);
    }

    #[test]
    fn whitespace_and_tab_delimiters() {
        let ws = parse_table("1 10\n2   20\n3 30\n").unwrap();
        assert_eq!(ws.curve.ys(), &[10.0, 20.0, 30.0]);
        let tab = parse_table("z\tmu\tsigma\n0.1\t38.0\t0.2\n0.2\t39.5\t0.2\n").unwrap();
        assert_eq!(tab.curve.xs(), &[0.1, 0.2]);
        assert_eq!(tab.raw_column_count, 3);
        assert_eq!(tab.numeric_column_count, 3);
    }

    #[test]
    fn sorts_and_drops_duplicate_x() {
        let parsed = parse_table("3,30\n1,10\n2,20\n1,99\n").unwrap();
        assert_eq!(parsed.curve.xs(), &[1.0, 2.0, 3.0]);
        assert_eq!(parsed.curve.ys(), &[10.0, 20.0, 30.0]);
        assert_eq!(parsed.duplicate_x, 1);
    }

    #[test]
    fn stray_footer_tolerated() {
        let mut text = String::new();
        for i in 0..20 {
            text.push_str(&format!("{i},{}\n", i * 2));
        }
        text.push_str("done,ok\n");
        let parsed = parse_table(&text).unwrap();
        assert_eq!(parsed.curve.len(), 20);
        assert_eq!(parsed.skipped_rows, 1);
    }

    #[test]
    fn non_numeric_column_is_skipped_for_xy() {
        let text = "label,x,y\na,1,5\nb,2,6\nc,3,7\n";
        let parsed = parse_table(text).unwrap();
        assert_eq!(parsed.curve.xs(), &[1.0, 2.0, 3.0]);
        assert_eq!(parsed.curve.ys(), &[5.0, 6.0, 7.0]);
    }

    #[test]
    fn one_row_is_too_few() {
        assert_eq!(
            parse_table("1,2\n").unwrap_err(),
            CurveError::TooFewPoints { found: 1 }
        );
    }

    #[test]
    fn new_validates() {
        assert!(Curve::new(alloc::vec![0.0, 0.0], alloc::vec![1.0, 2.0]).is_err());
        assert!(Curve::new(alloc::vec![0.0, f64::NAN], alloc::vec![1.0, 2.0]).is_err());
        assert!(Curve::new(alloc::vec![0.0, 1.0], alloc::vec![1.0]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let c = Curve::new(alloc::vec![0.5, 1.0, 2.0], alloc::vec![1e-9, -3.25, 1e5]).unwrap();
        let parsed = parse_table(&to_csv(&c, "x", "y")).unwrap();
        assert_eq!(parsed.curve, c);
    }
}
