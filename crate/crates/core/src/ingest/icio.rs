//! ICIO table files.
//!
//! ```text
//! #icio,1
//! #year,2018
//! #vintage,oecd-2021
//! #countries,AAA,BBB
//! #industries,D10T12,D24
//! row,AAA_D10T12,AAA_D24,BBB_D10T12,BBB_D24,FD_AAA,FD_BBB,OUTPUT
//! AAA_D10T12,...
//! ```
//!
//! Each data row holds the N*K intermediate-use cells, N final-demand cells
//! and gross output, in that order.

use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::{
    fmt_number, parse_number, parse_year, read_to_string, schema, write_atomic, IngestError, Result,
};
use crate::mrio::{IcioTable, MrioError};

const MAGIC: &str = "#icio,1";

pub fn load_icio(path: &Path) -> Result<IcioTable> {
    parse_icio(&read_to_string(path)?).map_err(|e| e.in_file(path))
}

pub fn parse_icio(text: &str) -> Result<IcioTable> {
    let mut lines = text.split('\n').enumerate().map(|(i, l)| (i + 1, l));
    let mut year = None;
    let mut vintage = None;
    let mut countries: Option<Vec<String>> = None;
    let mut industries: Option<Vec<String>> = None;

    let (first_no, first) = lines.next().ok_or_else(|| schema(1, "empty file"))?;
    if first != MAGIC {
        return Err(schema(first_no, format!("expected `{MAGIC}` header")));
    }

    let header = loop {
        let (no, line) = lines
            .next()
            .ok_or_else(|| schema(0, "missing column header"))?;
        let Some(meta) = line.strip_prefix('#') else {
            break (no, line);
        };
        let mut fields = meta.split(',');
        let key = fields.next().unwrap_or_default();
        let values: Vec<String> = fields.map(str::to_string).collect();
        match key {
            "year" if values.len() == 1 => year = Some(parse_year(&values[0], no)?),
            "vintage" if values.len() == 1 => vintage = Some(values[0].clone()),
            "countries" if !values.is_empty() => countries = Some(values),
            "industries" if !values.is_empty() => industries = Some(values),
            _ => return Err(schema(no, format!("unrecognized metadata line `#{meta}`"))),
        }
    };
    let countries = countries.ok_or_else(|| schema(header.0, "missing #countries metadata"))?;
    let industries = industries.ok_or_else(|| schema(header.0, "missing #industries metadata"))?;
    let n = countries.len();
    let nk = n * industries.len();

    let row_labels: Vec<String> = countries
        .iter()
        .flat_map(|c| industries.iter().map(move |i| format!("{c}_{i}")))
        .collect();
    let mut expected = vec!["row".to_string()];
    expected.extend(row_labels.iter().cloned());
    expected.extend(countries.iter().map(|c| format!("FD_{c}")));
    expected.push("OUTPUT".into());
    let got: Vec<&str> = header.1.split(',').collect();
    if got.len() != expected.len() {
        return Err(schema(
            header.0,
            format!(
                "header has {} columns, expected {}",
                got.len(),
                expected.len()
            ),
        ));
    }
    if let Some(pos) = got.iter().zip(&expected).position(|(g, e)| g != e) {
        return Err(schema(
            header.0,
            format!(
                "column {} is `{}`, expected `{}`",
                pos + 1,
                got[pos],
                expected[pos]
            ),
        ));
    }

    let mut z = DMatrix::zeros(nk, nk);
    let mut f = DMatrix::zeros(nk, n);
    let mut x = DVector::zeros(nk);
    let mut row = 0;
    for (no, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != expected.len() {
            return Err(schema(
                no,
                format!(
                    "row has {} columns, expected {}",
                    fields.len(),
                    expected.len()
                ),
            ));
        }
        if row >= nk {
            return Err(schema(no, format!("more than {nk} data rows")));
        }
        if fields[0] != row_labels[row] {
            return Err(schema(
                no,
                format!("row label `{}`, expected `{}`", fields[0], row_labels[row]),
            ));
        }
        for j in 0..nk {
            z[(row, j)] = parse_number(fields[1 + j], no)?;
        }
        for d in 0..n {
            f[(row, d)] = parse_number(fields[1 + nk + d], no)?;
        }
        x[row] = parse_number(fields[1 + nk + n], no)?;
        row += 1;
    }
    if row != nk {
        return Err(schema(0, format!("found {row} data rows, expected {nk}")));
    }

    let mut table = IcioTable::new(countries, industries, z, f, x).map_err(|e| match e {
        MrioError::Unbalanced(rows) => IngestError::Balance(rows),
        other => IngestError::Table(other),
    })?;
    if let Some(y) = year {
        table = table.with_year(y);
    }
    if let Some(v) = vintage {
        table = table.with_vintage(v);
    }
    Ok(table)
}

pub fn render_icio(table: &IcioTable) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    if let Some(y) = table.year() {
        out.push_str(&format!("#year,{y}\n"));
    }
    if let Some(v) = table.vintage() {
        out.push_str(&format!("#vintage,{v}\n"));
    }
    out.push_str(&format!("#countries,{}\n", table.countries().join(",")));
    out.push_str(&format!("#industries,{}\n", table.industries().join(",")));
    out.push_str("row");
    for r in 0..table.dim() {
        out.push(',');
        out.push_str(&table.row_label(r));
    }
    for c in table.countries() {
        out.push_str(&format!(",FD_{c}"));
    }
    out.push_str(",OUTPUT\n");
    let (z, f, x) = (table.intermediate(), table.final_demand(), table.output());
    for r in 0..table.dim() {
        out.push_str(&table.row_label(r));
        for v in z.row(r).iter().chain(f.row(r).iter()) {
            out.push(',');
            out.push_str(&fmt_number(*v));
        }
        out.push(',');
        out.push_str(&fmt_number(x[r]));
        out.push('\n');
    }
    out
}

pub fn write_icio(path: &Path, table: &IcioTable) -> Result<()> {
    write_atomic(path, &render_icio(table))
}
