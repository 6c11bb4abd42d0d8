//! Emissions vectors, indicator panels, assembled panels and account exports.

use std::collections::HashMap;
use std::path::Path;

use nalgebra::DVector;

use super::{fmt_number, parse_number, parse_year, read_to_string, schema, IngestError, Result};
use crate::mrio::{ConservationCheck, EmbodiedAccounts, EmissionIntensity, IcioTable};
use crate::panel::{vars, PanelDataset};

const EMISSIONS_HEADER: &str = "country,industry,emissions";
const INDICATOR_HEADER: &str = "country,year,variable,value,unit";

/// Splits a delimited body into (line number, fields), checking the header
/// and the field count of every row.
fn records<'a>(text: &'a str, header: &str) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut lines = text.split('\n').enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, h)) if h == header => {}
        Some((no, h)) => return Err(schema(no, format!("header `{h}`, expected `{header}`"))),
        None => return Err(schema(1, "empty file")),
    }
    let width = header.split(',').count();
    let mut out = Vec::new();
    for (no, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(schema(
                no,
                format!("{} fields, expected {width}", fields.len()),
            ));
        }
        out.push((no, fields));
    }
    Ok(out)
}

/// Raw emissions (tonnes) in ICIO row order; rows may appear in any order.
pub fn parse_emissions(text: &str, icio: &IcioTable) -> Result<DVector<f64>> {
    let k = icio.industries().len();
    let country_pos: HashMap<&str, usize> = icio
        .countries()
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    let industry_pos: HashMap<&str, usize> = icio
        .industries()
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    let mut values: Vec<Option<f64>> = vec![None; icio.dim()];
    for (no, f) in records(text, EMISSIONS_HEADER)? {
        let c = *country_pos
            .get(f[0])
            .ok_or_else(|| schema(no, format!("unknown country `{}`", f[0])))?;
        let i = *industry_pos
            .get(f[1])
            .ok_or_else(|| schema(no, format!("unknown industry `{}`", f[1])))?;
        let v = parse_number(f[2], no)?;
        let label = format!("{}_{}", f[0], f[1]);
        if v < 0.0 {
            return Err(IngestError::NegativeEmission { label, value: v });
        }
        let slot = &mut values[c * k + i];
        if slot.is_some() {
            return Err(IngestError::DuplicateKey(format!("({}, {})", f[0], f[1])));
        }
        *slot = Some(v);
    }
    let mut out = DVector::zeros(icio.dim());
    for (r, v) in values.into_iter().enumerate() {
        out[r] = v.ok_or_else(|| IngestError::MissingRow(icio.row_label(r)))?;
    }
    Ok(out)
}

/// Loads raw emissions and converts them to intensities per unit of output.
pub fn load_emissions_vector(path: &Path, icio: &IcioTable) -> Result<EmissionIntensity> {
    let raw = parse_emissions(&read_to_string(path)?, icio).map_err(|e| e.in_file(path))?;
    Ok(EmissionIntensity::from_emissions(&raw, icio.output())?)
}

pub fn render_emissions(icio: &IcioTable, emissions: &DVector<f64>) -> String {
    let mut out = format!("{EMISSIONS_HEADER}\n");
    let k = icio.industries().len();
    for r in 0..icio.dim() {
        out.push_str(&format!(
            "{},{},{}\n",
            icio.countries()[r / k],
            icio.industries()[r % k],
            fmt_number(emissions[r])
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorRecord {
    pub country: String,
    pub year: i32,
    pub variable: String,
    pub value: f64,
    pub unit: String,
}

/// Long-format indicator series keyed by (country, year, variable).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IndicatorPanel {
    records: Vec<IndicatorRecord>,
    index: HashMap<(String, i32, String), usize>,
}

impl IndicatorPanel {
    pub fn from_records(records: Vec<IndicatorRecord>) -> Result<Self> {
        let mut index = HashMap::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            if !r.value.is_finite() {
                return Err(IngestError::Schema {
                    line: i + 2,
                    message: format!(
                        "non-finite value for ({}, {}, {})",
                        r.country, r.year, r.variable
                    ),
                });
            }
            if index
                .insert((r.country.clone(), r.year, r.variable.clone()), i)
                .is_some()
            {
                return Err(IngestError::DuplicateKey(format!(
                    "({}, {}, {})",
                    r.country, r.year, r.variable
                )));
            }
        }
        Ok(Self { records, index })
    }

    pub fn records(&self) -> &[IndicatorRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, country: &str, year: i32, variable: &str) -> Option<f64> {
        self.index
            .get(&(country.to_string(), year, variable.to_string()))
            .map(|&i| self.records[i].value)
    }

    /// Variable names in order of first appearance.
    pub fn variables(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.records {
            if !out.contains(&r.variable) {
                out.push(r.variable.clone());
            }
        }
        out
    }
}

/// How unrecognized indicator names are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VariableNames {
    #[default]
    Strict,
    PassThrough,
}

/// Maps common spellings onto the canonical indicator codes.
pub fn normalize_variable(name: &str) -> Option<&'static str> {
    let key: String = name
        .trim()
        .chars()
        .map(|c| {
            if c == ' ' || c == '-' || c == '.' {
                '_'
            } else {
                c.to_ascii_uppercase()
            }
        })
        .collect();
    let code = match key.as_str() {
        "GDP" | "GDP_PER_CAPITA" | "GDPPC" | "ECONOMIC_GROWTH" => vars::GDP,
        "MFG" | "MANUFACTURING_SHARE" | "MANUFACTURING_VALUE_ADDED" => vars::MFG,
        "ESI"
        | "STR"
        | "EPS"
        | "STRINGENCY"
        | "STRINGENCY_INDEX"
        | "ENVIRONMENTAL_STRINGENCY_INDEX" => vars::ESI,
        "TO" | "TRADE_OPENNESS" => vars::TO,
        "FOR_COVER" | "FOREST_COVER" => vars::FOR_COVER,
        "REN_ENERGY_CONS" | "RENEWABLE_ENERGY_CONSUMPTION" => vars::REN_ENERGY_CONS,
        "POP_DENSITY" | "POPULATION_DENSITY" => vars::POP_DENSITY,
        _ => return None,
    };
    Some(code)
}

pub fn parse_indicator_panel(text: &str, names: VariableNames) -> Result<IndicatorPanel> {
    let mut out = Vec::new();
    for (no, f) in records(text, INDICATOR_HEADER)? {
        let variable = match (normalize_variable(f[2]), names) {
            (Some(code), _) => code.to_string(),
            (None, VariableNames::PassThrough) if !f[2].trim().is_empty() => {
                f[2].trim().to_string()
            }
            (None, _) => return Err(IngestError::UnknownVariableName(f[2].to_string())),
        };
        out.push(IndicatorRecord {
            country: f[0].to_string(),
            year: parse_year(f[1], no)?,
            variable,
            value: parse_number(f[3], no)?,
            unit: f[4].to_string(),
        });
    }
    IndicatorPanel::from_records(out)
}

pub fn load_indicator_panel(path: &Path, names: VariableNames) -> Result<IndicatorPanel> {
    parse_indicator_panel(&read_to_string(path)?, names).map_err(|e| e.in_file(path))
}

pub fn render_indicator_panel(panel: &IndicatorPanel) -> String {
    let mut out = format!("{INDICATOR_HEADER}\n");
    for r in panel.records() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.country,
            r.year,
            r.variable,
            fmt_number(r.value),
            r.unit
        ));
    }
    out
}

/// Wide panel file: `country,year,VAR...`, with `NA` for unavailable cells.
pub fn render_panel(panel: &PanelDataset) -> String {
    let names: Vec<&str> = panel.variable_names().collect();
    let mut out = String::from("country,year");
    for n in &names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for (u, unit) in panel.units().iter().enumerate() {
        for (t, period) in panel.periods().iter().enumerate() {
            out.push_str(&format!("{unit},{period}"));
            for n in &names {
                let cell = panel.value(n, u, t).expect("listed variable");
                out.push(',');
                out.push_str(&cell.map(fmt_number).unwrap_or_else(|| "NA".into()));
            }
            out.push('\n');
        }
    }
    out
}

/// Reads a wide panel file. Cells must be complete (no `NA`): derived
/// variables are rebuilt by the caller.
pub fn parse_panel(text: &str) -> Result<PanelDataset> {
    let mut lines = text.split('\n').enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| schema(1, "empty file"))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 3 || cols[0] != "country" || cols[1] != "year" {
        return Err(schema(
            1,
            "panel header must start with `country,year` and name at least one variable",
        ));
    }
    let mut units: Vec<String> = Vec::new();
    let mut periods: Vec<i32> = Vec::new();
    let mut cells: HashMap<(String, i32), Vec<f64>> = HashMap::new();
    for (no, line) in lines {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != cols.len() {
            return Err(schema(
                no,
                format!("{} fields, expected {}", f.len(), cols.len()),
            ));
        }
        let year = parse_year(f[1], no)?;
        if !units.iter().any(|u| u == f[0]) {
            units.push(f[0].to_string());
        }
        if !periods.contains(&year) {
            periods.push(year);
        }
        let values = f[2..]
            .iter()
            .map(|v| parse_number(v, no))
            .collect::<Result<Vec<_>>>()?;
        if cells.insert((f[0].to_string(), year), values).is_some() {
            return Err(IngestError::DuplicateKey(format!("({}, {year})", f[0])));
        }
    }
    periods.sort_unstable();
    let mut panel = PanelDataset::new(units.clone(), periods.clone())?;
    for (k, name) in cols[2..].iter().enumerate() {
        let mut values = Vec::with_capacity(units.len() * periods.len());
        for u in &units {
            for &p in &periods {
                let row = cells.get(&(u.clone(), p)).ok_or_else(|| {
                    IngestError::Panel(crate::panel::PanelError::MissingCell {
                        unit: u.clone(),
                        period: p,
                        variable: name.to_string(),
                    })
                })?;
                values.push(row[k]);
            }
        }
        panel = panel.with_raw(name, values)?;
    }
    Ok(panel)
}

pub fn load_panel(path: &Path) -> Result<PanelDataset> {
    parse_panel(&read_to_string(path)?).map_err(|e| e.in_file(path))
}

/// Per-year export accounts, one row per (country, industry) plus a
/// `TOTAL` row per country. The first line records the conservation check.
pub fn render_accounts(accounts: &EmbodiedAccounts, check: &ConservationCheck) -> String {
    let mut out = format!(
        "#conservation,production={},consumption={},relative_gap={:e}\n",
        fmt_number(check.production_total),
        fmt_number(check.consumption_total),
        check.relative_gap()
    );
    out.push_str(
        "country,industry,gross_exports,domestic_co2,foreign_co2,forward_gvc,backward_gvc\n",
    );
    let row = |c: &str, i: &str, a: &crate::mrio::IndustryAccounts| {
        format!(
            "{c},{i},{},{},{},{},{}\n",
            fmt_number(a.gross_exports),
            fmt_number(a.domestic_co2),
            fmt_number(a.foreign_co2),
            fmt_number(a.forward_gvc),
            fmt_number(a.backward_gvc)
        )
    };
    for (country, rows) in &accounts.countries {
        for (ind, a) in accounts.industries.iter().zip(rows) {
            out.push_str(&row(country, ind, a));
        }
        let total = accounts.country_total(country).expect("country present");
        out.push_str(&row(country, "TOTAL", &total));
    }
    out
}
