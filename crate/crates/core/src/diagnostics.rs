//! Residual cross-sectional dependence, descriptive statistics, pooled
//! correlations and country rankings.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimators::normal_two_sided;
use crate::panel::{PanelDataset, PanelError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error(
        "need at least {units} units and {periods} periods, have {got_units} and {got_periods}"
    )]
    InsufficientData {
        units: usize,
        periods: usize,
        got_units: usize,
        got_periods: usize,
    },
    #[error("series `{0}` is constant; correlation undefined")]
    DegenerateSeries(String),
    #[error("no value for `{0}`")]
    MissingValue(String),
    #[error("gross exports of `{0}` are not positive")]
    NonPositiveGrossExports(String),
    #[error("need at least two variables")]
    TooFewVariables,
    #[error(transparent)]
    Panel(#[from] PanelError),
}

pub type Result<T> = std::result::Result<T, DiagnosticsError>;

#[derive(Debug, Clone, PartialEq)]
pub struct CdReport {
    pub statistic: f64,
    /// Mean of `|rho_ij|` over pairs `i < j`.
    pub avg_abs_correlation: f64,
    /// Symmetric N x N, unit diagonal.
    pub pairwise: DMatrix<f64>,
    pub p_value: f64,
    pub n_units: usize,
    pub n_periods: usize,
}

/// Pesaran's CD statistic on a residual panel, one row per unit.
///
/// `CD = sqrt(2 / (N (N-1))) * sum_{i<j} sqrt(T_ij) rho_ij`, where `T_ij`
/// counts the periods both units observe; for a balanced panel this is
/// `sqrt(2T / (N (N-1))) * sum rho_ij`.
pub fn pesaran_cd(residuals: &[Vec<Option<f64>>]) -> Result<CdReport> {
    pesaran_cd_labeled(residuals, None)
}

pub fn pesaran_cd_labeled(
    residuals: &[Vec<Option<f64>>],
    labels: Option<&[String]>,
) -> Result<CdReport> {
    let n = residuals.len();
    let t = residuals.iter().map(Vec::len).max().unwrap_or(0);
    if n < 2 || t < 3 {
        return Err(DiagnosticsError::InsufficientData {
            units: 2,
            periods: 3,
            got_units: n,
            got_periods: t,
        });
    }
    let name = |i: usize| labels.map_or_else(|| format!("unit {i}"), |l| l[i].clone());
    for (i, row) in residuals.iter().enumerate() {
        let vals: Vec<f64> = row.iter().flatten().copied().collect();
        if vals.len() < 2 || vals.iter().all(|v| *v == vals[0]) {
            return Err(DiagnosticsError::DegenerateSeries(name(i)));
        }
    }

    let mut pairwise = DMatrix::identity(n, n);
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let (a, b): (Vec<f64>, Vec<f64>) = residuals[i]
                .iter()
                .zip(&residuals[j])
                .filter_map(|(x, y)| Some(((*x)?, (*y)?)))
                .unzip();
            let r = pearson(&a, &b).ok_or_else(|| DiagnosticsError::DegenerateSeries(name(i)))?;
            pairwise[(i, j)] = r;
            pairwise[(j, i)] = r;
            sum += (a.len() as f64).sqrt() * r;
            abs_sum += r.abs();
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    let statistic = (2.0 / (n * (n - 1)) as f64).sqrt() * sum;
    Ok(CdReport {
        statistic,
        avg_abs_correlation: abs_sum / pairs,
        pairwise,
        p_value: normal_two_sided(statistic),
        n_units: n,
        n_periods: t,
    })
}

/// Sample correlation clamped to [-1, 1]; `None` if either side is constant.
fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() < 2 {
        return None;
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return None;
    }
    Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescriptiveRow {
    pub variable: String,
    pub obs: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
}

/// Obs, mean, standard deviation, min and max over the available cells.
pub fn descriptive_stats(panel: &PanelDataset, variables: &[&str]) -> Result<Vec<DescriptiveRow>> {
    variables
        .iter()
        .map(|v| {
            let vals: Vec<f64> = panel.grid(v)?.iter().flatten().copied().collect();
            if vals.is_empty() {
                return Err(DiagnosticsError::MissingValue((*v).to_string()));
            }
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let var = if vals.len() > 1 {
                vals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            Ok(DescriptiveRow {
                variable: (*v).to_string(),
                obs: vals.len(),
                mean: mean.clamp(
                    vals.iter().copied().fold(f64::INFINITY, f64::min),
                    vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                ),
                std_dev: var.sqrt(),
                min: vals.iter().copied().fold(f64::INFINITY, f64::min),
                max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub variables: Vec<String>,
    pub values: DMatrix<f64>,
    /// Pooled observations used (listwise).
    pub obs: usize,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.variables.iter().position(|v| v == a)?;
        let j = self.variables.iter().position(|v| v == b)?;
        Some(self.values[(i, j)])
    }
}

/// Pearson correlations over pooled unit-period observations.
pub fn correlation_matrix(panel: &PanelDataset, variables: &[&str]) -> Result<CorrelationMatrix> {
    if variables.len() < 2 {
        return Err(DiagnosticsError::TooFewVariables);
    }
    let grids: Vec<_> = variables
        .iter()
        .map(|v| panel.grid(v))
        .collect::<std::result::Result<_, _>>()?;
    let rows: Vec<Vec<f64>> = (0..panel.cells())
        .filter_map(|c| grids.iter().map(|g| g[c]).collect::<Option<Vec<f64>>>())
        .collect();
    let k = variables.len();
    let cols: Vec<Vec<f64>> = (0..k)
        .map(|j| rows.iter().map(|r| r[j]).collect())
        .collect();
    let mut values = DMatrix::identity(k, k);
    for i in 0..k {
        for j in i + 1..k {
            let r = pearson(&cols[i], &cols[j]).ok_or_else(|| {
                let bad = if pearson(&cols[i], &cols[i]).is_none() {
                    i
                } else {
                    j
                };
                DiagnosticsError::DegenerateSeries(variables[bad].to_string())
            })?;
            values[(i, j)] = r;
            values[(j, i)] = r;
        }
    }
    Ok(CorrelationMatrix {
        variables: variables.iter().map(|v| v.to_string()).collect(),
        values,
        obs: rows.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RankBasis {
    #[serde(rename = "level")]
    Level,
    #[serde(rename = "share")]
    ShareOfGrossExports,
}

impl RankBasis {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Level => "level",
            Self::ShareOfGrossExports => "share",
        }
    }
}

impl std::str::FromStr for RankBasis {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "level" => Ok(Self::Level),
            "share" | "share-of-gross-exports" => Ok(Self::ShareOfGrossExports),
            other => Err(format!("unknown rank basis `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankInput {
    pub country: String,
    pub value: Option<f64>,
    pub gross_exports: Option<f64>,
}

impl RankInput {
    pub fn new(country: &str, value: f64) -> Self {
        Self {
            country: country.into(),
            value: Some(value),
            gross_exports: None,
        }
    }

    pub fn with_gross_exports(mut self, ex: f64) -> Self {
        self.gross_exports = Some(ex);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankRow {
    pub rank: usize,
    pub country: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankTable {
    pub indicator: String,
    pub year: i32,
    pub basis: RankBasis,
    pub rows: Vec<RankRow>,
}

impl RankTable {
    pub fn country_at(&self, rank: usize) -> Option<&str> {
        self.rows
            .get(rank.checked_sub(1)?)
            .map(|r| r.country.as_str())
    }
}

/// Ranks countries from highest to lowest value; ties go to the
/// lexicographically smaller country code.
pub fn rank_table(
    indicator: &str,
    year: i32,
    basis: RankBasis,
    inputs: &[RankInput],
) -> Result<RankTable> {
    let mut rows: Vec<RankRow> = inputs
        .iter()
        .map(|inp| {
            let v = inp
                .value
                .filter(|v| v.is_finite())
                .ok_or_else(|| DiagnosticsError::MissingValue(inp.country.clone()))?;
            let value = match basis {
                RankBasis::Level => v,
                RankBasis::ShareOfGrossExports => {
                    let ex = inp
                        .gross_exports
                        .ok_or_else(|| DiagnosticsError::MissingValue(inp.country.clone()))?;
                    if ex <= 0.0 || !ex.is_finite() {
                        return Err(DiagnosticsError::NonPositiveGrossExports(
                            inp.country.clone(),
                        ));
                    }
                    v / ex
                }
            };
            Ok(RankRow {
                rank: 0,
                country: inp.country.clone(),
                value,
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| {
        b.value
            .partial_cmp(&a.value)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.country.cmp(&b.country))
    });
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    Ok(RankTable {
        indicator: indicator.into(),
        year,
        basis,
        rows,
    })
}
