//! Inter-country input-output accounting.
//!
//! The pipeline is `IcioTable -> TechnicalCoefficients -> LeontiefModel`,
//! after which export-embodied emissions and value-added flows are read off
//! the global Leontief inverse by country block:
//!
//! * domestic CO2 in exports of `c`: source rows in `c`, columns of `c`
//! * foreign CO2 in exports of `c`: source rows outside `c`, columns of `c`
//! * forward participation of `c`: value added of `c` in partners' exports
//! * backward participation of `c`: foreign value added in exports of `c`
//!
//! Every flow is weighted by the gross exports of the absorbing row, so the
//! domestic and foreign parts sum to the all-source total exactly.

use std::ops::Range;

use indexmap::IndexMap;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Absolute floor for balance checks, in monetary units.
pub const BALANCE_ABS_TOL: f64 = 1e-6;
/// Relative balance tolerance against gross output.
pub const BALANCE_REL_TOL: f64 = 1e-8;
/// Negative intermediate entries up to this share of row output are clamped to zero.
pub const NEGATIVE_Z_CLAMP: f64 = 1e-6;
/// Maximum tolerated negative entry in an accepted Leontief inverse.
pub const NEGATIVE_B_TOL: f64 = 1e-6;
/// Residual bound on `(I - A) B - I` for an accepted inverse.
pub const LEONTIEF_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MrioError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unknown country `{0}`")]
    UnknownCountry(String),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("row balance violated in {} row(s); worst: {}", .0.len(), format_rows(.0))]
    Unbalanced(Vec<(String, f64)>),
    #[error("value added negative in column `{label}` ({value})")]
    NegativeValueAdded { label: String, value: f64 },
    #[error("invalid entry at `{label}`: {reason}")]
    InvalidEntry { label: String, reason: String },
    #[error("zero output in column `{0}` with nonzero intermediate inputs")]
    SingularOutput(String),
    #[error("economy is not productive: {0}")]
    NonProductive(String),
}

fn format_rows(rows: &[(String, f64)]) -> String {
    rows.iter()
        .map(|(l, d)| format!("{l} ({d:+.3e})"))
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T> = std::result::Result<T, MrioError>;

/// Contiguous row/column ranges of each country in an ICIO ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockIndex {
    blocks: IndexMap<String, Range<usize>>,
    industries: usize,
}

impl BlockIndex {
    pub fn new(countries: &[String], industries: usize) -> Result<Self> {
        let mut blocks = IndexMap::with_capacity(countries.len());
        for (k, c) in countries.iter().enumerate() {
            let range = k * industries..(k + 1) * industries;
            if blocks.insert(c.clone(), range).is_some() {
                return Err(MrioError::DuplicateLabel(c.clone()));
            }
        }
        Ok(Self { blocks, industries })
    }

    pub fn range(&self, country: &str) -> Result<Range<usize>> {
        self.blocks
            .get(country)
            .cloned()
            .ok_or_else(|| MrioError::UnknownCountry(country.to_string()))
    }

    /// Country position owning a row.
    pub fn country_position(&self, row: usize) -> usize {
        row / self.industries
    }

    pub fn countries(&self) -> impl Iterator<Item = &str> {
        self.blocks.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn industries(&self) -> usize {
        self.industries
    }

    pub fn dim(&self) -> usize {
        self.blocks.len() * self.industries
    }
}

/// Inter-country input-output table with final demand aggregated per
/// destination country.
#[derive(Debug, Clone, PartialEq)]
pub struct IcioTable {
    countries: Vec<String>,
    industries: Vec<String>,
    z: DMatrix<f64>,
    f: DMatrix<f64>,
    x: DVector<f64>,
    va: DVector<f64>,
    index: BlockIndex,
    year: Option<i32>,
    vintage: Option<String>,
}

impl IcioTable {
    /// Validates the table and derives value added as `x_j - sum_i Z_ij`.
    ///
    /// Tiny negative intermediate entries are clamped to zero, larger ones
    /// are rejected. Negative final demand is accepted (inventory changes).
    pub fn new(
        countries: Vec<String>,
        industries: Vec<String>,
        mut z: DMatrix<f64>,
        f: DMatrix<f64>,
        x: DVector<f64>,
    ) -> Result<Self> {
        let n = countries.len();
        let k = industries.len();
        let nk = n * k;
        if n == 0 || k == 0 {
            return Err(MrioError::DimensionMismatch(
                "table needs at least one country and one industry".into(),
            ));
        }
        if z.shape() != (nk, nk) {
            return Err(MrioError::DimensionMismatch(format!(
                "Z is {:?}, expected ({nk}, {nk})",
                z.shape()
            )));
        }
        if f.shape() != (nk, n) {
            return Err(MrioError::DimensionMismatch(format!(
                "F is {:?}, expected ({nk}, {n})",
                f.shape()
            )));
        }
        if x.len() != nk {
            return Err(MrioError::DimensionMismatch(format!(
                "x has length {}, expected {nk}",
                x.len()
            )));
        }
        {
            let mut seen = std::collections::HashSet::new();
            for ind in &industries {
                if !seen.insert(ind) {
                    return Err(MrioError::DuplicateLabel(ind.clone()));
                }
            }
        }
        let index = BlockIndex::new(&countries, k)?;
        let label = |r: usize| format!("{}_{}", countries[r / k], industries[r % k]);

        let mut clamped = Vec::new();
        for i in 0..nk {
            if !x[i].is_finite() || x[i] < 0.0 {
                return Err(MrioError::InvalidEntry {
                    label: label(i),
                    reason: format!("gross output {} must be finite and nonnegative", x[i]),
                });
            }
            for j in 0..nk {
                let v = z[(i, j)];
                if !v.is_finite() {
                    return Err(MrioError::InvalidEntry {
                        label: format!("{} -> {}", label(i), label(j)),
                        reason: "non-finite intermediate use".into(),
                    });
                }
                if v < 0.0 {
                    if v.abs() <= NEGATIVE_Z_CLAMP * x[i] {
                        clamped.push((i, j));
                    } else {
                        return Err(MrioError::InvalidEntry {
                            label: format!("{} -> {}", label(i), label(j)),
                            reason: format!("negative intermediate use {v}"),
                        });
                    }
                }
            }
            for d in 0..n {
                if !f[(i, d)].is_finite() {
                    return Err(MrioError::InvalidEntry {
                        label: format!("{} -> FD_{}", label(i), countries[d]),
                        reason: "non-finite final demand".into(),
                    });
                }
            }
        }

        let mut violations: Vec<(String, f64)> = (0..nk)
            .filter_map(|i| {
                let total = z.row(i).sum() + f.row(i).sum();
                let dev = x[i] - total;
                let tol = BALANCE_ABS_TOL.max(BALANCE_REL_TOL * x[i]);
                (dev.abs() > tol).then(|| (label(i), dev))
            })
            .collect();
        if !violations.is_empty() {
            violations.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
            violations.truncate(10);
            return Err(MrioError::Unbalanced(violations));
        }
        // balance is judged on the table as published, clamping comes after
        for (i, j) in clamped {
            z[(i, j)] = 0.0;
        }

        let mut va = DVector::zeros(nk);
        for j in 0..nk {
            let inputs = z.column(j).sum();
            let v = x[j] - inputs;
            let tol = BALANCE_ABS_TOL.max(BALANCE_REL_TOL * x[j]);
            if v < -tol {
                return Err(MrioError::NegativeValueAdded {
                    label: label(j),
                    value: v,
                });
            }
            va[j] = v.max(0.0);
        }

        Ok(Self {
            countries,
            industries,
            z,
            f,
            x,
            va,
            index,
            year: None,
            vintage: None,
        })
    }

    pub fn with_year(mut self, year: i32) -> Self {
        self.year = Some(year);
        self
    }

    pub fn with_vintage(mut self, vintage: impl Into<String>) -> Self {
        self.vintage = Some(vintage.into());
        self
    }

    pub fn countries(&self) -> &[String] {
        &self.countries
    }

    pub fn industries(&self) -> &[String] {
        &self.industries
    }

    pub fn intermediate(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn final_demand(&self) -> &DMatrix<f64> {
        &self.f
    }

    pub fn output(&self) -> &DVector<f64> {
        &self.x
    }

    pub fn value_added(&self) -> &DVector<f64> {
        &self.va
    }

    pub fn index(&self) -> &BlockIndex {
        &self.index
    }

    pub fn year(&self) -> Option<i32> {
        self.year
    }

    pub fn vintage(&self) -> Option<&str> {
        self.vintage.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// `COUNTRY_INDUSTRY` label of a row.
    pub fn row_label(&self, row: usize) -> String {
        let k = self.industries.len();
        format!("{}_{}", self.countries[row / k], self.industries[row % k])
    }

    /// Total final demand per row, summed over destinations.
    pub fn total_final_demand(&self) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.f.row_iter().map(|r| r.sum()))
    }

    /// Value-added coefficients `va_i / x_i`, zero where output is zero.
    pub fn value_added_coefficients(&self) -> DVector<f64> {
        self.va
            .zip_map(&self.x, |va, x| if x > 0.0 { va / x } else { 0.0 })
    }

    /// Gross exports of every row to all foreign destinations.
    pub fn all_gross_exports(&self) -> DVector<f64> {
        let n = self.countries.len();
        let k = self.industries.len();
        let mut ex = DVector::zeros(self.dim());
        for i in 0..self.dim() {
            let home = i / k;
            let mut total = 0.0;
            for d in (0..n).filter(|&d| d != home) {
                total += self.z.row(i).columns(d * k, k).sum();
                total += self.f[(i, d)];
            }
            ex[i] = total;
        }
        ex
    }
}

/// Direct emissions per unit of gross output, tonnes per thousand USD.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionIntensity(DVector<f64>);

impl EmissionIntensity {
    pub fn new(e: DVector<f64>) -> Result<Self> {
        if let Some(i) = e.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(MrioError::InvalidEntry {
                label: format!("intensity[{i}]"),
                reason: format!("{} must be finite and nonnegative", e[i]),
            });
        }
        Ok(Self(e))
    }

    /// `e_i = c_i / x_i`, zero wherever output is zero.
    pub fn from_emissions(emissions: &DVector<f64>, output: &DVector<f64>) -> Result<Self> {
        if emissions.len() != output.len() {
            return Err(MrioError::DimensionMismatch(format!(
                "{} emission rows for {} output rows",
                emissions.len(),
                output.len()
            )));
        }
        Self::new(emissions.zip_map(output, |c, x| if x > 0.0 { c / x } else { 0.0 }))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DVector::zeros(dim))
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Technical coefficients `A = Z diag(x)^-1`, before inversion.
#[derive(Debug, Clone, PartialEq)]
pub struct TechnicalCoefficients {
    a: DMatrix<f64>,
    index: BlockIndex,
}

impl TechnicalCoefficients {
    /// Wraps an existing coefficient matrix, e.g. for experiments on
    /// hand-built economies.
    pub fn from_matrix(a: DMatrix<f64>, index: BlockIndex) -> Result<Self> {
        if a.shape() != (index.dim(), index.dim()) {
            return Err(MrioError::DimensionMismatch(format!(
                "A is {:?}, index covers {}",
                a.shape(),
                index.dim()
            )));
        }
        Ok(Self { a, index })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn index(&self) -> &BlockIndex {
        &self.index
    }

    /// Solves `(I - A) B = I` by LU with partial pivoting.
    pub fn leontief_inverse(self) -> Result<LeontiefModel> {
        let dim = self.a.nrows();
        let identity = DMatrix::<f64>::identity(dim, dim);
        let i_minus_a = &identity - &self.a;
        let lu = i_minus_a.clone().lu();
        let mut b = lu
            .solve(&identity)
            .ok_or_else(|| MrioError::NonProductive("I - A is singular".into()))?;

        let mut residual = max_abs(&(&i_minus_a * &b - &identity));
        if residual > LEONTIEF_RESIDUAL_TOL && residual.is_finite() {
            // one step of iterative refinement
            let r = &identity - &i_minus_a * &b;
            if let Some(delta) = lu.solve(&r) {
                b += delta;
                residual = max_abs(&(&i_minus_a * &b - &identity));
            }
        }
        if !residual.is_finite() || residual > LEONTIEF_RESIDUAL_TOL {
            return Err(MrioError::NonProductive(format!(
                "Leontief residual {residual:.3e} exceeds {LEONTIEF_RESIDUAL_TOL:.0e}"
            )));
        }
        let min = b.min();
        if min < -NEGATIVE_B_TOL {
            return Err(MrioError::NonProductive(format!(
                "Leontief inverse has negative entry {min:.3e}"
            )));
        }
        Ok(LeontiefModel {
            a: self.a,
            b,
            index: self.index,
        })
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Technical coefficients together with the global Leontief inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct LeontiefModel {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    index: BlockIndex,
}

impl LeontiefModel {
    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn index(&self) -> &BlockIndex {
        &self.index
    }

    /// `max |(I - A) B - I|`.
    pub fn residual(&self) -> f64 {
        let dim = self.a.nrows();
        let identity = DMatrix::<f64>::identity(dim, dim);
        max_abs(&((&identity - &self.a) * &self.b - identity))
    }
}

/// `A_ij = Z_ij / x_j`, zero columns where output is zero.
pub fn build_coefficients(icio: &IcioTable) -> Result<TechnicalCoefficients> {
    let dim = icio.dim();
    let mut a = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let xj = icio.x[j];
        if xj > 0.0 {
            for i in 0..dim {
                a[(i, j)] = icio.z[(i, j)] / xj;
            }
        } else if icio.z.column(j).iter().any(|v| v.abs() > 1e-9) {
            return Err(MrioError::SingularOutput(icio.row_label(j)));
        }
    }
    Ok(TechnicalCoefficients {
        a,
        index: icio.index.clone(),
    })
}

pub fn leontief_inverse(coefficients: TechnicalCoefficients) -> Result<LeontiefModel> {
    coefficients.leontief_inverse()
}

/// Gross exports of each industry of `country` to every foreign destination.
pub fn gross_exports(icio: &IcioTable, country: &str) -> Result<Vec<f64>> {
    let rows = icio.index.range(country)?;
    let all = icio.all_gross_exports();
    Ok(rows.map(|i| all[i]).collect())
}

/// `diag(e) B T`: emissions from each source row embodied in each trade
/// flow column.
pub fn embodied_emissions(
    intensity: &EmissionIntensity,
    inverse: &DMatrix<f64>,
    trade: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let dim = intensity.len();
    if inverse.shape() != (dim, dim) || trade.nrows() != dim {
        return Err(MrioError::DimensionMismatch(format!(
            "e has {dim} rows, B is {:?}, T is {:?}",
            inverse.shape(),
            trade.shape()
        )));
    }
    let mut c = inverse * trade;
    for (i, mut row) in c.row_iter_mut().enumerate() {
        row *= intensity.0[i];
    }
    Ok(c)
}

/// A per-country quantity with its industry breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct CountryAmount {
    pub total: f64,
    pub by_industry: Vec<f64>,
}

impl CountryAmount {
    fn from_parts(by_industry: Vec<f64>) -> Self {
        Self {
            total: by_industry.iter().sum(),
            by_industry,
        }
    }
}

fn check_inputs(
    intensity: &EmissionIntensity,
    model: &LeontiefModel,
    icio: &IcioTable,
) -> Result<()> {
    let dim = icio.dim();
    if intensity.len() != dim || model.b.nrows() != dim {
        return Err(MrioError::DimensionMismatch(format!(
            "ICIO has {dim} rows, intensity {}, Leontief inverse {}",
            intensity.len(),
            model.b.nrows()
        )));
    }
    Ok(())
}

/// Export-embodied emissions of `country` by exporting industry, with
/// sources restricted to rows for which `keep(source_row)` holds.
fn export_embodied_by_source(
    intensity: &EmissionIntensity,
    model: &LeontiefModel,
    exports: &DVector<f64>,
    columns: Range<usize>,
    keep: impl Fn(usize) -> bool,
) -> Vec<f64> {
    let e = &intensity.0;
    columns
        .map(|j| {
            let multiplier: f64 = (0..e.len())
                .filter(|&s| keep(s))
                .map(|s| e[s] * model.b[(s, j)])
                .sum();
            multiplier * exports[j]
        })
        .collect()
}

/// CO2 embodied in the gross exports of `country` that is emitted by
/// domestic industries, by exporting industry.
pub fn domestic_co2_exports(
    intensity: &EmissionIntensity,
    model: &LeontiefModel,
    icio: &IcioTable,
    country: &str,
) -> Result<CountryAmount> {
    check_inputs(intensity, model, icio)?;
    let rows = icio.index.range(country)?;
    let exports = icio.all_gross_exports();
    let home = rows.clone();
    Ok(CountryAmount::from_parts(export_embodied_by_source(
        intensity,
        model,
        &exports,
        rows,
        |s| home.contains(&s),
    )))
}

/// CO2 embodied in the gross exports of `country` that is emitted by
/// foreign upstream industries, by exporting industry.
pub fn foreign_co2_exports(
    intensity: &EmissionIntensity,
    model: &LeontiefModel,
    icio: &IcioTable,
    country: &str,
) -> Result<CountryAmount> {
    check_inputs(intensity, model, icio)?;
    let rows = icio.index.range(country)?;
    let exports = icio.all_gross_exports();
    let home = rows.clone();
    Ok(CountryAmount::from_parts(export_embodied_by_source(
        intensity,
        model,
        &exports,
        rows,
        |s| !home.contains(&s),
    )))
}

/// CO2 from every source embodied in the gross exports of `country`.
pub fn total_co2_exports(
    intensity: &EmissionIntensity,
    model: &LeontiefModel,
    icio: &IcioTable,
    country: &str,
) -> Result<CountryAmount> {
    check_inputs(intensity, model, icio)?;
    let rows = icio.index.range(country)?;
    let exports = icio.all_gross_exports();
    Ok(CountryAmount::from_parts(export_embodied_by_source(
        intensity,
        model,
        &exports,
        rows,
        |_| true,
    )))
}

/// Value added of `country` embodied in its partners' gross exports, by
/// originating domestic industry.
pub fn forward_gvc(
    icio: &IcioTable,
    model: &LeontiefModel,
    country: &str,
) -> Result<CountryAmount> {
    check_inputs(&EmissionIntensity::zeros(icio.dim()), model, icio)?;
    let rows = icio.index.range(country)?;
    let v = icio.value_added_coefficients();
    let exports = icio.all_gross_exports();
    let by_industry = rows
        .clone()
        .map(|i| {
            let downstream: f64 = (0..icio.dim())
                .filter(|j| !rows.contains(j))
                .map(|j| model.b[(i, j)] * exports[j])
                .sum();
            v[i] * downstream
        })
        .collect();
    Ok(CountryAmount::from_parts(by_industry))
}

/// Foreign value added embodied in the gross exports of `country`, by
/// exporting industry.
pub fn backward_gvc(
    icio: &IcioTable,
    model: &LeontiefModel,
    country: &str,
) -> Result<CountryAmount> {
    value_added_in_exports(icio, model, country, false)
}

/// Domestic value added embodied in the gross exports of `country`.
pub fn domestic_value_added_in_exports(
    icio: &IcioTable,
    model: &LeontiefModel,
    country: &str,
) -> Result<CountryAmount> {
    value_added_in_exports(icio, model, country, true)
}

fn value_added_in_exports(
    icio: &IcioTable,
    model: &LeontiefModel,
    country: &str,
    domestic: bool,
) -> Result<CountryAmount> {
    check_inputs(&EmissionIntensity::zeros(icio.dim()), model, icio)?;
    let rows = icio.index.range(country)?;
    let v = icio.value_added_coefficients();
    let exports = icio.all_gross_exports();
    let by_industry = rows
        .clone()
        .map(|j| {
            let share: f64 = (0..icio.dim())
                .filter(|s| rows.contains(s) == domestic)
                .map(|s| v[s] * model.b[(s, j)])
                .sum();
            share * exports[j]
        })
        .collect();
    Ok(CountryAmount::from_parts(by_industry))
}

/// The four export indicators for one industry of one country.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IndustryAccounts {
    pub gross_exports: f64,
    pub domestic_co2: f64,
    pub foreign_co2: f64,
    pub forward_gvc: f64,
    pub backward_gvc: f64,
}

impl std::ops::AddAssign for IndustryAccounts {
    fn add_assign(&mut self, rhs: Self) {
        self.gross_exports += rhs.gross_exports;
        self.domestic_co2 += rhs.domestic_co2;
        self.foreign_co2 += rhs.foreign_co2;
        self.forward_gvc += rhs.forward_gvc;
        self.backward_gvc += rhs.backward_gvc;
    }
}

/// Per-country, per-industry export accounts for one table.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbodiedAccounts {
    pub year: Option<i32>,
    pub industries: Vec<String>,
    pub countries: IndexMap<String, Vec<IndustryAccounts>>,
}

impl EmbodiedAccounts {
    pub fn compute(
        icio: &IcioTable,
        model: &LeontiefModel,
        intensity: &EmissionIntensity,
    ) -> Result<Self> {
        check_inputs(intensity, model, icio)?;
        let mut countries = IndexMap::with_capacity(icio.countries.len());
        for c in &icio.countries {
            let ex = gross_exports(icio, c)?;
            let dom = domestic_co2_exports(intensity, model, icio, c)?;
            let fore = foreign_co2_exports(intensity, model, icio, c)?;
            let fwd = forward_gvc(icio, model, c)?;
            let bwd = backward_gvc(icio, model, c)?;
            let rows = (0..icio.industries.len())
                .map(|k| IndustryAccounts {
                    gross_exports: ex[k],
                    domestic_co2: dom.by_industry[k],
                    foreign_co2: fore.by_industry[k],
                    forward_gvc: fwd.by_industry[k],
                    backward_gvc: bwd.by_industry[k],
                })
                .collect();
            countries.insert(c.clone(), rows);
        }
        Ok(Self {
            year: icio.year,
            industries: icio.industries.clone(),
            countries,
        })
    }

    pub fn country(&self, code: &str) -> Option<&[IndustryAccounts]> {
        self.countries.get(code).map(Vec::as_slice)
    }

    /// Sum over all industries of a country.
    pub fn country_total(&self, code: &str) -> Option<IndustryAccounts> {
        self.aggregate(code, |_| true)
    }

    /// Sum over the industries selected by `include`.
    pub fn aggregate(
        &self,
        code: &str,
        include: impl Fn(&str) -> bool,
    ) -> Option<IndustryAccounts> {
        let rows = self.countries.get(code)?;
        let mut acc = IndustryAccounts::default();
        for (ind, row) in self.industries.iter().zip(rows) {
            if include(ind) {
                acc += *row;
            }
        }
        Some(acc)
    }
}

/// Production-side versus consumption-side global emission totals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservationCheck {
    pub production_total: f64,
    pub consumption_total: f64,
}

impl ConservationCheck {
    pub fn relative_gap(&self) -> f64 {
        let scale = self
            .production_total
            .abs()
            .max(self.consumption_total.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.production_total - self.consumption_total).abs() / scale
        }
    }
}

/// Compares `sum e_i x_i` against the emissions embodied in final demand.
pub fn conservation_check(
    icio: &IcioTable,
    model: &LeontiefModel,
    intensity: &EmissionIntensity,
) -> Result<ConservationCheck> {
    check_inputs(intensity, model, icio)?;
    let production_total = intensity.0.dot(&icio.x);
    let fd = icio.total_final_demand();
    let embodied = embodied_emissions(
        intensity,
        &model.b,
        &DMatrix::from_column_slice(fd.len(), 1, fd.as_slice()),
    )?;
    Ok(ConservationCheck {
        production_total,
        consumption_total: embodied.sum(),
    })
}
