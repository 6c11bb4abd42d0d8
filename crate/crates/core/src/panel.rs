//! Balanced country x year panels and the transforms used by the regressions.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::IndicatorPanel;
use crate::mrio::EmbodiedAccounts;

/// Variable codes produced from the export accounts.
pub mod vars {
    pub const DOM_CO2: &str = "DOM_CO2";
    pub const FOR_CO2: &str = "FOR_CO2";
    pub const FWD_GVC: &str = "FWD_GVC";
    pub const BWD_GVC: &str = "BWD_GVC";
    pub const GROSS_EXPORTS: &str = "GROSS_EXPORTS";
    pub const GDP: &str = "GDP";
    pub const MFG: &str = "MFG";
    pub const ESI: &str = "ESI";
    pub const TO: &str = "TO";
    pub const FOR_COVER: &str = "FOR_COVER";
    pub const REN_ENERGY_CONS: &str = "REN_ENERGY_CONS";
    pub const POP_DENSITY: &str = "POP_DENSITY";

    pub const ACCOUNT_VARIABLES: [&str; 5] = [DOM_CO2, FOR_CO2, FWD_GVC, BWD_GVC, GROSS_EXPORTS];
    pub const INDICATOR_VARIABLES: [&str; 7] =
        [GDP, MFG, ESI, TO, FOR_COVER, REN_ENERGY_CONS, POP_DENSITY];
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PanelError {
    #[error("missing cell ({unit}, {period}, {variable})")]
    MissingCell {
        unit: String,
        period: i32,
        variable: String,
    },
    #[error("variable `{0}` is provided by more than one source")]
    DuplicateSource(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` already exists")]
    VariableExists(String),
    #[error("cannot take log of {value} at ({unit}, {period}) in `{variable}`")]
    NonPositiveLog {
        variable: String,
        unit: String,
        period: i32,
        value: f64,
    },
    #[error("invalid panel: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, PanelError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LogBase {
    #[default]
    #[serde(rename = "10")]
    Ten,
    #[serde(rename = "e")]
    Natural,
}

impl LogBase {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            LogBase::Ten => v.log10(),
            LogBase::Natural => v.ln(),
        }
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogBase::Ten => "10",
            LogBase::Natural => "e",
        })
    }
}

impl std::str::FromStr for LogBase {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "10" => Ok(LogBase::Ten),
            "e" | "ln" | "natural" => Ok(LogBase::Natural),
            other => Err(format!("unknown log base `{other}` (expected 10 or e)")),
        }
    }
}

/// How a derived variable was produced from its parents.
#[derive(Debug, Clone, PartialEq)]
pub enum Transform {
    Raw,
    Log { base: LogBase, shift: f64 },
    Square,
    Interaction,
    Lag(usize),
    Diff,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub transform: Transform,
    pub parents: Vec<String>,
}

/// Transform requested from [`PanelDataset::derive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeriveKind {
    Log(LogBase),
    /// Log of `v + shift`; only for indices that may be zero or negative.
    ShiftedLog(LogBase, f64),
    Square,
    Interaction,
    Lag(usize),
    Diff,
}

/// Unit-major N x T values. `None` marks a cell lost to lagging or differencing.
pub type Grid = Vec<Option<f64>>;

#[derive(Debug, Clone, PartialEq)]
pub struct PanelDataset {
    units: Vec<String>,
    periods: Vec<i32>,
    variables: IndexMap<String, Arc<Grid>>,
    meta: IndexMap<String, Provenance>,
}

impl PanelDataset {
    /// Empty panel over the given dimensions.
    pub fn new(units: Vec<String>, periods: Vec<i32>) -> Result<Self> {
        if units.is_empty() || periods.is_empty() {
            return Err(PanelError::Invalid(
                "panel needs at least one unit and one period".into(),
            ));
        }
        if units.iter().collect::<HashSet<_>>().len() != units.len() {
            return Err(PanelError::Invalid("duplicate unit code".into()));
        }
        if periods.windows(2).any(|w| w[1] <= w[0]) {
            return Err(PanelError::Invalid(
                "periods must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            units,
            periods,
            variables: IndexMap::new(),
            meta: IndexMap::new(),
        })
    }

    /// Adds a fully observed raw variable, values unit-major.
    pub fn with_raw(mut self, name: &str, values: Vec<f64>) -> Result<Self> {
        if self.variables.contains_key(name) {
            return Err(PanelError::VariableExists(name.into()));
        }
        if values.len() != self.cells() {
            return Err(PanelError::Invalid(format!(
                "`{name}` has {} values for {} cells",
                values.len(),
                self.cells()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(PanelError::MissingCell {
                unit: self.units[pos / self.periods.len()].clone(),
                period: self.periods[pos % self.periods.len()],
                variable: name.into(),
            });
        }
        self.variables.insert(
            name.into(),
            Arc::new(values.into_iter().map(Some).collect()),
        );
        self.meta.insert(
            name.into(),
            Provenance {
                transform: Transform::Raw,
                parents: vec![],
            },
        );
        Ok(self)
    }

    pub fn units(&self) -> &[String] {
        &self.units
    }

    pub fn periods(&self) -> &[i32] {
        &self.periods
    }

    pub fn n_units(&self) -> usize {
        self.units.len()
    }

    pub fn n_periods(&self) -> usize {
        self.periods.len()
    }

    pub fn cells(&self) -> usize {
        self.units.len() * self.periods.len()
    }

    pub fn variable_names(&self) -> impl Iterator<Item = &str> {
        self.variables.keys().map(String::as_str)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.variables.contains_key(name)
    }

    pub fn grid(&self, name: &str) -> Result<&Grid> {
        self.variables
            .get(name)
            .map(|g| g.as_ref())
            .ok_or_else(|| PanelError::UnknownVariable(name.into()))
    }

    pub fn provenance(&self, name: &str) -> Option<&Provenance> {
        self.meta.get(name)
    }

    pub fn value(&self, name: &str, unit: usize, period: usize) -> Result<Option<f64>> {
        Ok(self.grid(name)?[unit * self.periods.len() + period])
    }

    /// Values of one unit's series.
    pub fn series(&self, name: &str, unit: usize) -> Result<&[Option<f64>]> {
        let t = self.periods.len();
        Ok(&self.grid(name)?[unit * t..(unit + 1) * t])
    }

    pub fn unit_position(&self, code: &str) -> Option<usize> {
        self.units.iter().position(|u| u == code)
    }

    /// All ancestors of a variable through its provenance chain.
    pub fn ancestors(&self, name: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut stack: Vec<&str> = vec![name];
        while let Some(v) = stack.pop() {
            if let Some(p) = self.meta.get(v) {
                for parent in &p.parents {
                    if !out.contains(parent) {
                        out.push(parent.clone());
                        stack.push(parent);
                    }
                }
            }
        }
        out
    }

    /// Restricts the panel to a subset of units, keeping their order in `units`.
    pub fn select_units(&self, units: &[String]) -> Result<Self> {
        let positions: Vec<usize> = units
            .iter()
            .map(|u| {
                self.unit_position(u)
                    .ok_or_else(|| PanelError::Invalid(format!("unknown unit `{u}`")))
            })
            .collect::<Result<_>>()?;
        let t = self.periods.len();
        let variables = self
            .variables
            .iter()
            .map(|(name, grid)| {
                let sub: Grid = positions
                    .iter()
                    .flat_map(|&p| grid[p * t..(p + 1) * t].iter().copied())
                    .collect();
                (name.clone(), Arc::new(sub))
            })
            .collect();
        Ok(Self {
            units: units.to_vec(),
            periods: self.periods.clone(),
            variables,
            meta: self.meta.clone(),
        })
    }

    /// Returns a new panel with `out` derived from `inputs`; existing grids
    /// are shared, not copied.
    pub fn derive(&self, kind: DeriveKind, inputs: &[&str], out: &str) -> Result<Self> {
        if self.variables.contains_key(out) {
            return Err(PanelError::VariableExists(out.into()));
        }
        let arity = if matches!(kind, DeriveKind::Interaction) {
            2
        } else {
            1
        };
        if inputs.len() != arity {
            return Err(PanelError::Invalid(format!(
                "{kind:?} takes {arity} input(s), got {}",
                inputs.len()
            )));
        }
        let first = self.grid(inputs[0])?;
        let t = self.periods.len();
        let (grid, transform): (Grid, Transform) = match kind {
            DeriveKind::Log(base) => (
                self.log_grid(inputs[0], first, base, 0.0)?,
                Transform::Log { base, shift: 0.0 },
            ),
            DeriveKind::ShiftedLog(base, shift) => (
                self.log_grid(inputs[0], first, base, shift)?,
                Transform::Log { base, shift },
            ),
            DeriveKind::Square => (
                first.iter().map(|v| v.map(|v| v * v)).collect(),
                Transform::Square,
            ),
            DeriveKind::Interaction => {
                let second = self.grid(inputs[1])?;
                let g = first
                    .iter()
                    .zip(second.iter())
                    .map(|(a, b)| match (a, b) {
                        (Some(a), Some(b)) => Some(a * b),
                        _ => None,
                    })
                    .collect();
                (g, Transform::Interaction)
            }
            DeriveKind::Lag(k) => {
                let g = (0..first.len())
                    .map(|idx| if idx % t >= k { first[idx - k] } else { None })
                    .collect();
                (g, Transform::Lag(k))
            }
            DeriveKind::Diff => {
                let g = (0..first.len())
                    .map(|idx| {
                        if idx % t == 0 {
                            return None;
                        }
                        match (first[idx], first[idx - 1]) {
                            (Some(cur), Some(prev)) => Some(cur - prev),
                            _ => None,
                        }
                    })
                    .collect();
                (g, Transform::Diff)
            }
        };
        let mut next = self.clone();
        next.variables.insert(out.into(), Arc::new(grid));
        next.meta.insert(
            out.into(),
            Provenance {
                transform,
                parents: inputs.iter().map(|s| s.to_string()).collect(),
            },
        );
        Ok(next)
    }

    fn log_grid(&self, name: &str, grid: &Grid, base: LogBase, shift: f64) -> Result<Grid> {
        let t = self.periods.len();
        grid.iter()
            .enumerate()
            .map(|(idx, v)| match v {
                None => Ok(None),
                Some(v) if v + shift > 0.0 => Ok(Some(base.apply(v + shift))),
                Some(v) => Err(PanelError::NonPositiveLog {
                    variable: name.into(),
                    unit: self.units[idx / t].clone(),
                    period: self.periods[idx % t],
                    value: *v,
                }),
            })
            .collect()
    }

    /// Adds `out` only when it is not already present.
    pub fn derive_if_missing(&self, kind: DeriveKind, inputs: &[&str], out: &str) -> Result<Self> {
        if self.contains(out) {
            Ok(self.clone())
        } else {
            self.derive(kind, inputs, out)
        }
    }
}

/// Free-function form of [`PanelDataset::derive`].
pub fn derive_variable(
    panel: &PanelDataset,
    kind: DeriveKind,
    inputs: &[&str],
    out: &str,
) -> Result<PanelDataset> {
    panel.derive(kind, inputs, out)
}

/// Builds a balanced panel from yearly export accounts and indicator series.
///
/// Account variables are aggregated over the industries in `manufacturing`.
/// Every variable found in either source must cover every (unit, period).
pub fn assemble_panel(
    accounts: &BTreeMap<i32, EmbodiedAccounts>,
    indicators: &IndicatorPanel,
    units: &[String],
    periods: &[i32],
    manufacturing: &[String],
) -> Result<PanelDataset> {
    let mut panel = PanelDataset::new(units.to_vec(), periods.to_vec())?;
    let indicator_vars = indicators.variables();

    if !accounts.is_empty() {
        for v in vars::ACCOUNT_VARIABLES {
            if indicator_vars.iter().any(|iv| iv == v) {
                return Err(PanelError::DuplicateSource(v.into()));
            }
        }
        let mfg: HashSet<&str> = manufacturing.iter().map(String::as_str).collect();
        let mut columns: [Vec<f64>; 5] = Default::default();
        for unit in units {
            for &period in periods {
                let missing = |variable: &str| PanelError::MissingCell {
                    unit: unit.clone(),
                    period,
                    variable: variable.into(),
                };
                let year = accounts
                    .get(&period)
                    .ok_or_else(|| missing(vars::DOM_CO2))?;
                if !year.industries.iter().any(|i| mfg.contains(i.as_str())) {
                    return Err(PanelError::Invalid(format!(
                        "no manufacturing industry of the configured set appears in the {period} accounts"
                    )));
                }
                let agg = year
                    .aggregate(unit, |ind| mfg.contains(ind))
                    .ok_or_else(|| missing(vars::DOM_CO2))?;
                columns[0].push(agg.domestic_co2);
                columns[1].push(agg.foreign_co2);
                columns[2].push(agg.forward_gvc);
                columns[3].push(agg.backward_gvc);
                columns[4].push(agg.gross_exports);
            }
        }
        for (name, values) in vars::ACCOUNT_VARIABLES.iter().zip(columns) {
            panel = panel.with_raw(name, values)?;
        }
    }

    for var in &indicator_vars {
        let mut values = Vec::with_capacity(units.len() * periods.len());
        for unit in units {
            for &period in periods {
                let v =
                    indicators
                        .get(unit, period, var)
                        .ok_or_else(|| PanelError::MissingCell {
                            unit: unit.clone(),
                            period,
                            variable: var.clone(),
                        })?;
                values.push(v);
            }
        }
        panel = panel.with_raw(var, values)?;
    }
    Ok(panel)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableReport {
    pub variable: String,
    pub n: usize,
    pub t: usize,
    pub count: usize,
    pub holes: Vec<(String, i32)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BalanceReport {
    pub variables: Vec<VariableReport>,
    pub unknown: Vec<String>,
}

impl BalanceReport {
    pub fn is_balanced(&self) -> bool {
        self.unknown.is_empty()
            && self
                .variables
                .iter()
                .all(|v| v.holes.is_empty() && v.count == v.n * v.t)
    }

    pub fn holes(&self) -> impl Iterator<Item = (&str, &str, i32)> {
        self.variables.iter().flat_map(|v| {
            v.holes
                .iter()
                .map(move |(u, p)| (v.variable.as_str(), u.as_str(), *p))
        })
    }
}

/// Counts observed cells per variable and lists every hole.
pub fn validate_balanced(panel: &PanelDataset, required: &[&str]) -> BalanceReport {
    let mut report = BalanceReport::default();
    let t = panel.n_periods();
    for &name in required {
        match panel.grid(name) {
            Ok(grid) => {
                let holes: Vec<(String, i32)> = grid
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| v.is_none())
                    .map(|(idx, _)| (panel.units[idx / t].clone(), panel.periods[idx % t]))
                    .collect();
                report.variables.push(VariableReport {
                    variable: name.into(),
                    n: panel.n_units(),
                    t,
                    count: grid.len() - holes.len(),
                    holes,
                });
            }
            Err(_) => report.unknown.push(name.into()),
        }
    }
    report
}
