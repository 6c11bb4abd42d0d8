//! Readers and writers for the on-disk schemas.
//!
//! All files are UTF-8, comma-delimited, LF-terminated, with a header row.
//! Numbers use a decimal point and no grouping separators. Writers emit the
//! shortest representation that parses back to the same `f64`, so a
//! load-write-load cycle reproduces the same bytes.

mod config;
mod icio;
mod tables;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::mrio::MrioError;
use crate::panel::PanelError;

pub use config::{
    DataPaths, ModelOptions, OutputOptions, RunConfig, Sample, DATA_DIR_ENV, DEFAULT_MANUFACTURING,
};
pub use icio::{load_icio, parse_icio, render_icio, write_icio};
pub use tables::{
    load_emissions_vector, load_indicator_panel, load_panel, normalize_variable, parse_emissions,
    parse_indicator_panel, parse_panel, render_accounts, render_emissions, render_indicator_panel,
    render_panel, IndicatorPanel, IndicatorRecord, VariableNames,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("schema error at line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("row balance violated; worst rows: {}", .0.iter().map(|(l, d)| format!("{l} ({d:+.3e})")).collect::<Vec<_>>().join(", "))]
    Balance(Vec<(String, f64)>),
    #[error("missing emissions row for `{0}`")]
    MissingRow(String),
    #[error("negative emissions {value} for `{label}`")]
    NegativeEmission { label: String, value: f64 },
    #[error("duplicate key {0}")]
    DuplicateKey(String),
    #[error("unknown variable name `{0}`")]
    UnknownVariableName(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Table(#[from] MrioError),
    #[error(transparent)]
    Panel(#[from] PanelError),
}

impl IngestError {
    /// Attaches a file name to schema errors.
    pub fn in_file(self, path: &Path) -> Self {
        match self {
            IngestError::Schema { line, message } => IngestError::Schema {
                line,
                message: format!("{}: {message}", path.display()),
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, IngestError>;

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn schema(line: usize, message: impl Into<String>) -> IngestError {
    IngestError::Schema {
        line,
        message: message.into(),
    }
}

/// Parses a finite decimal number. Rejects grouping separators, commas,
/// and the `inf`/`nan` spellings `f64::from_str` would otherwise accept.
pub(crate) fn parse_number(text: &str, line: usize) -> Result<f64> {
    let t = text.trim();
    let valid = !t.is_empty()
        && t.chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'));
    let value = if valid { t.parse::<f64>().ok() } else { None };
    match value {
        Some(v) if v.is_finite() => Ok(v),
        _ => Err(schema(
            line,
            format!("`{t}` is not a finite decimal number"),
        )),
    }
}

pub(crate) fn parse_year(text: &str, line: usize) -> Result<i32> {
    let t = text.trim();
    if t.is_empty()
        || !t
            .chars()
            .enumerate()
            .all(|(i, c)| c.is_ascii_digit() || (i == 0 && c == '-'))
    {
        return Err(schema(line, format!("`{t}` is not an integral year")));
    }
    t.parse::<i32>()
        .map_err(|_| schema(line, format!("`{t}` is not an integral year")))
}

/// Shortest round-trip rendering, normalizing negative zero.
pub(crate) fn fmt_number(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v}")
    }
}

/// Writes via a temporary sibling file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io = |source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    std::fs::write(&tmp, contents).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_are_locale_independent() {
        assert_eq!(parse_number("1.5", 1).unwrap(), 1.5);
        assert_eq!(parse_number("-2e3", 1).unwrap(), -2000.0);
        for bad in ["1,5", "1 000", "inf", "NaN", "", "1.0.0", "0x10"] {
            assert!(parse_number(bad, 1).is_err(), "{bad}");
        }
    }

    #[test]
    fn years_must_be_integral() {
        assert_eq!(parse_year("2005", 1).unwrap(), 2005);
        assert!(parse_year("2005.0", 1).is_err());
        assert!(parse_year("20o5", 1).is_err());
    }

    #[test]
    fn number_rendering_round_trips() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 123456789.125, -0.0] {
            assert_eq!(parse_number(&fmt_number(v), 1).unwrap(), v);
        }
        assert_eq!(fmt_number(-0.0), "0");
    }
}
