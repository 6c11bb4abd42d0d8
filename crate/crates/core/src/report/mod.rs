//! Paper-style tables, their text/CSV/JSON renderings, and the report bundle.

mod check;
mod models;
mod pipeline;

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::ingest::{write_atomic, IngestError};

pub use check::{
    check_tables, parse_expectations, CheckEntry, CheckReport, Expectation, DEFAULT_TOLERANCE,
};
pub use models::{
    cd_table, correlation_table, correlation_tables, country_name, descriptive_table, label_for,
    plot_data, prepare_panel, rank_report, run_model, single_rank_table, ModelColumn, ModelId,
    ModelOutput, LOG_PREFIX,
};
pub use pipeline::{Inputs, YearAccounts};

/// A number backing a rendered cell, addressed by (row key, column key).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Value {
    pub row: String,
    pub column: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub label: String,
    pub cells: Vec<String>,
    /// Printed beneath the row in text output (p-values in brackets).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beneath: Option<Vec<String>>,
    pub values: Vec<Value>,
    /// Library call that produced the row's numbers.
    pub source: String,
}

impl Row {
    pub fn new(label: impl Into<String>, cells: Vec<String>, source: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            cells,
            beneath: None,
            values: Vec::new(),
            source: source.into(),
        }
    }

    pub fn value(mut self, row: &str, column: &str, value: f64) -> Self {
        self.values.push(Value {
            row: row.into(),
            column: column.into(),
            value,
        });
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub id: String,
    pub caption: String,
    /// Header, including the label column.
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(id: &str, caption: impl Into<String>, columns: Vec<String>) -> Self {
        Self {
            id: id.into(),
            caption: caption.into(),
            columns,
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn row_labels(&self) -> Vec<&str> {
        self.rows.iter().map(|r| r.label.as_str()).collect()
    }

    pub fn row(&self, label: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn lookup(&self, row: &str, column: &str) -> Option<f64> {
        self.rows
            .iter()
            .flat_map(|r| &r.values)
            .find(|v| v.row == row && v.column == column)
            .map(|v| v.value)
    }

    pub fn to_text(&self) -> String {
        let ncol = self.columns.len();
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.chars().count()).collect();
        let line_cells = |r: &Row| -> Vec<Vec<String>> {
            let mut first = vec![r.label.clone()];
            first.extend(r.cells.iter().cloned());
            let mut lines = vec![first];
            if let Some(b) = &r.beneath {
                let mut second = vec![String::new()];
                second.extend(b.iter().cloned());
                lines.push(second);
            }
            lines
        };
        for r in &self.rows {
            for line in line_cells(r) {
                for (i, c) in line.iter().enumerate().take(ncol) {
                    widths[i] = widths[i].max(c.chars().count());
                }
            }
        }
        let fmt_line = |cells: &[String]| -> String {
            let mut s = String::new();
            for (i, w) in widths.iter().enumerate() {
                let c = cells.get(i).map(String::as_str).unwrap_or("");
                if i == 0 {
                    s.push_str(&format!("{c:<w$}"));
                } else {
                    s.push_str(&format!("  {c:>w$}"));
                }
            }
            s.trim_end().to_string()
        };
        let mut out = String::new();
        out.push_str(&self.caption);
        out.push('\n');
        let header = fmt_line(&self.columns);
        out.push_str(&header);
        out.push('\n');
        out.push_str(&"-".repeat(header.chars().count()));
        out.push('\n');
        for r in &self.rows {
            for line in line_cells(r) {
                out.push_str(&fmt_line(&line));
                out.push('\n');
            }
        }
        for n in &self.notes {
            out.push_str(n);
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            let mut rec = vec![r.label.clone()];
            for (i, c) in r.cells.iter().enumerate() {
                match r
                    .beneath
                    .as_ref()
                    .and_then(|b| b.get(i))
                    .filter(|b| !b.is_empty())
                {
                    Some(b) => rec.push(format!("{c} {b}")),
                    None => rec.push(c.clone()),
                }
            }
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flushed")).expect("utf-8 cells")
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("table serializes");
        s.push('\n');
        s
    }
}

/// Where a bundle's inputs came from. `generated_unix` is excluded from
/// [`ReportBundle::content_hash`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BundleProvenance {
    pub inputs: Vec<String>,
    pub config_hash: String,
    pub vintages: Vec<String>,
    pub generated_unix: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub tables: Vec<Table>,
    pub provenance: BundleProvenance,
    /// Extra delimited files (plot data), by file name.
    pub attachments: Vec<(String, String)>,
}

impl ReportBundle {
    pub fn table(&self, id: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.id == id)
    }

    /// SHA-256 over every rendered table and attachment plus the
    /// timestamp-free provenance.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.provenance.config_hash.as_bytes());
        for i in &self.provenance.inputs {
            h.update(i.as_bytes());
        }
        for v in &self.provenance.vintages {
            h.update(v.as_bytes());
        }
        for t in &self.tables {
            h.update(t.to_json().as_bytes());
        }
        for (name, body) in &self.attachments {
            h.update(name.as_bytes());
            h.update(body.as_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn manifest(&self) -> String {
        #[derive(Serialize)]
        struct Manifest<'a> {
            content_hash: String,
            provenance: &'a BundleProvenance,
            tables: Vec<TableEntry<'a>>,
            attachments: Vec<&'a str>,
        }
        #[derive(Serialize)]
        struct TableEntry<'a> {
            id: &'a str,
            caption: &'a str,
            sources: Vec<&'a str>,
        }
        let m = Manifest {
            content_hash: self.content_hash(),
            provenance: &self.provenance,
            tables: self
                .tables
                .iter()
                .map(|t| {
                    let mut sources: Vec<&str> = Vec::new();
                    for r in &t.rows {
                        if !sources.contains(&r.source.as_str()) {
                            sources.push(&r.source);
                        }
                    }
                    TableEntry {
                        id: &t.id,
                        caption: &t.caption,
                        sources,
                    }
                })
                .collect(),
            attachments: self.attachments.iter().map(|(n, _)| n.as_str()).collect(),
        };
        let mut s = serde_json::to_string_pretty(&m).expect("manifest serializes");
        s.push('\n');
        s
    }

    /// Writes `<id>.txt`, `<id>.csv` and `<id>.json` per table, the
    /// attachments, and `manifest.json`.
    pub fn write(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>, IngestError> {
        let mut written = Vec::new();
        for t in &self.tables {
            for (ext, body) in [
                ("txt", t.to_text()),
                ("csv", t.to_csv()),
                ("json", t.to_json()),
            ] {
                let p = dir.join(format!("{}.{ext}", t.id));
                write_atomic(&p, &body)?;
                written.push(p);
            }
        }
        for (name, body) in &self.attachments {
            let p = dir.join(name);
            write_atomic(&p, body)?;
            written.push(p);
        }
        let p = dir.join("manifest.json");
        write_atomic(&p, &self.manifest())?;
        written.push(p);
        Ok(written)
    }
}
