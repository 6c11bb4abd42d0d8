//! Comparing produced tables against expected values.
//!
//! Expectation files are CSV with header `table,row,column,expected,tolerance`;
//! `row` and `column` address a [`Value`](super::Value) and an empty
//! tolerance means [`DEFAULT_TOLERANCE`]. Lines starting with `#` are comments.

use serde::Deserialize;

use super::Table;
use crate::ingest::IngestError;

pub const DEFAULT_TOLERANCE: f64 = 5e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct Expectation {
    pub table: String,
    pub row: String,
    pub column: String,
    pub expected: f64,
    pub tolerance: f64,
}

#[derive(Debug, Deserialize)]
struct RawExpectation {
    table: String,
    row: String,
    column: String,
    expected: f64,
    tolerance: Option<f64>,
}

pub fn parse_expectations(text: &str) -> Result<Vec<Expectation>, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in reader.deserialize::<RawExpectation>().enumerate() {
        let line = i + 2;
        let r = rec.map_err(|e| IngestError::Schema {
            line,
            message: e.to_string(),
        })?;
        let tolerance = r.tolerance.unwrap_or(DEFAULT_TOLERANCE);
        if !r.expected.is_finite() || !tolerance.is_finite() || tolerance < 0.0 {
            return Err(IngestError::Schema {
                line,
                message: "expected value and tolerance must be finite".into(),
            });
        }
        out.push(Expectation {
            table: r.table,
            row: r.row,
            column: r.column,
            expected: r.expected,
            tolerance,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckEntry {
    pub expectation: Expectation,
    /// `None` when the cell does not exist in the produced tables.
    pub actual: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CheckReport {
    pub entries: Vec<CheckEntry>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| !e.passed)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            let x = &e.expectation;
            let actual = e
                .actual
                .map(|a| format!("{a}"))
                .unwrap_or_else(|| "missing".into());
            s.push_str(&format!(
                "{} {}/{}/{}: expected {} ± {}, got {actual}\n",
                if e.passed { "ok  " } else { "FAIL" },
                x.table,
                x.row,
                x.column,
                x.expected,
                x.tolerance
            ));
        }
        let failed = self.failures().count();
        s.push_str(&format!(
            "{} checked, {failed} failed\n",
            self.entries.len()
        ));
        s
    }
}

/// Looks every expectation up among `tables`.
pub fn check_tables(tables: &[Table], expectations: &[Expectation]) -> CheckReport {
    let entries = expectations
        .iter()
        .map(|x| {
            let actual = tables
                .iter()
                .find(|t| t.id == x.table)
                .and_then(|t| t.lookup(&x.row, &x.column));
            let passed = actual.is_some_and(|a| (a - x.expected).abs() <= x.tolerance);
            CheckEntry {
                expectation: x.clone(),
                actual,
                passed,
            }
        })
        .collect();
    CheckReport { entries }
}
