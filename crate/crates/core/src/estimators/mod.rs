//! Pooled panel regressions: OLS, FGLS with AR(1) and per-unit
//! heteroscedastic innovations, joint Wald tests, period fixed effects and
//! the Anderson-Hsiao first-difference IV estimator.

mod fgls;
mod iv;
mod ols;
mod render;

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};
use thiserror::Error;

use crate::panel::{Grid, PanelDataset, PanelError};

pub use fgls::fgls_ar1;
pub use iv::{anderson_hsiao, two_stage_least_squares, AndersonHsiaoSpec, TwoStageFit};
pub use ols::ols;
pub(crate) use render::fmt_fixed;
pub use render::{render_model, significance_stars, RenderedRow, Styling};

/// Name of the intercept column.
pub const INTERCEPT: &str = "const";
/// Relative residual below which a column counts as collinear with earlier ones.
pub const COLLINEARITY_TOL: f64 = 1e-10;
/// Largest accepted condition number of the column-scaled design.
pub const MAX_CONDITION: f64 = 1e10;
/// First-stage F below which an instrument is flagged as weak.
pub const WEAK_INSTRUMENT_F: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("invalid regression spec: {0}")]
    InvalidSpec(String),
    #[error("design is rank deficient: `{column}` is collinear with [{}]", .collinear_with.join(", "))]
    RankDeficient {
        column: String,
        collinear_with: Vec<String>,
    },
    #[error("estimated AR(1) coefficient {0} is not stationary")]
    NonStationaryRho(f64),
    #[error("sub-covariance for the Wald test is singular")]
    SingularSubCovariance,
    #[error("insufficient periods: need {needed}, have {got}")]
    InsufficientPeriods { needed: usize, got: usize },
    #[error("insufficient observations: {n} observations for {p} coefficients")]
    InsufficientObservations { n: usize, p: usize },
    #[error("unit `{0}` has zero residual variance")]
    DegenerateVariance(String),
    #[error(transparent)]
    Panel(#[from] PanelError),
}

pub type Result<T> = std::result::Result<T, EstimatorError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CovarianceScheme {
    #[serde(rename = "iid")]
    Iid,
    #[serde(rename = "panel-heteroscedastic")]
    PanelHeteroscedastic,
    #[serde(rename = "ar1")]
    Ar1,
    #[default]
    #[serde(rename = "ar1+panel-heteroscedastic")]
    Ar1PanelHeteroscedastic,
}

impl CovarianceScheme {
    pub fn autocorrelated(self) -> bool {
        matches!(self, Self::Ar1 | Self::Ar1PanelHeteroscedastic)
    }

    pub fn heteroscedastic(self) -> bool {
        matches!(
            self,
            Self::PanelHeteroscedastic | Self::Ar1PanelHeteroscedastic
        )
    }
}

impl std::str::FromStr for CovarianceScheme {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "iid" => Ok(Self::Iid),
            "panel-heteroscedastic" => Ok(Self::PanelHeteroscedastic),
            "ar1" => Ok(Self::Ar1),
            "ar1+panel-heteroscedastic" => Ok(Self::Ar1PanelHeteroscedastic),
            other => Err(format!("unknown covariance scheme `{other}`")),
        }
    }
}

/// Instrument for the differenced lagged dependent variable (and the
/// instrumented regressor) in the Anderson-Hsiao estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum InstrumentVariant {
    /// `dy_{t-2}` (and `dx_{t-2}`).
    #[default]
    #[serde(rename = "lagged-difference")]
    LaggedDifference,
    /// `y_{t-2}` (and `x_{t-2}`).
    #[serde(rename = "lagged-level")]
    LaggedLevel,
}

impl std::str::FromStr for InstrumentVariant {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "lagged-difference" => Ok(Self::LaggedDifference),
            "lagged-level" => Ok(Self::LaggedLevel),
            other => Err(format!("unknown instrument variant `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Regressor {
    Variable(String),
    /// Indicator for one period; the first period is the omitted base.
    PeriodDummy(i32),
}

impl Regressor {
    pub fn name(&self) -> String {
        match self {
            Regressor::Variable(v) => v.clone(),
            Regressor::PeriodDummy(p) => format!("year_{p}"),
        }
    }
}

impl fmt::Display for Regressor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSpec {
    pub dependent: String,
    pub regressors: Vec<Regressor>,
    pub intercept: bool,
    pub time_effects: bool,
    pub scheme: CovarianceScheme,
    /// Estimate one AR(1) coefficient per unit instead of a pooled one.
    pub per_unit_rho: bool,
}

impl RegressionSpec {
    pub fn new<S: AsRef<str>>(dependent: &str, regressors: &[S]) -> Self {
        Self {
            dependent: dependent.into(),
            regressors: regressors
                .iter()
                .map(|r| Regressor::Variable(r.as_ref().into()))
                .collect(),
            intercept: true,
            time_effects: false,
            scheme: CovarianceScheme::Ar1PanelHeteroscedastic,
            per_unit_rho: false,
        }
    }

    pub fn scheme(mut self, scheme: CovarianceScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn without_intercept(mut self) -> Self {
        self.intercept = false;
        self
    }

    pub fn per_unit_rho(mut self, on: bool) -> Self {
        self.per_unit_rho = on;
        self
    }

    /// Appends `T - 1` period indicators, omitting the first period.
    pub fn with_time_effects(mut self, periods: &[i32]) -> Self {
        for &p in periods.iter().skip(1) {
            let d = Regressor::PeriodDummy(p);
            if !self.regressors.contains(&d) {
                self.regressors.push(d);
            }
        }
        self.time_effects = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.regressors.is_empty() && !self.intercept {
            return Err(EstimatorError::InvalidSpec("no regressors".into()));
        }
        if self.regressors.is_empty() {
            return Err(EstimatorError::InvalidSpec(
                "regressor list is empty".into(),
            ));
        }
        let names: Vec<String> = self.regressors.iter().map(Regressor::name).collect();
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(EstimatorError::InvalidSpec(format!(
                    "regressor `{n}` listed twice"
                )));
            }
            if n == INTERCEPT {
                return Err(EstimatorError::InvalidSpec(format!(
                    "`{INTERCEPT}` is reserved"
                )));
            }
        }
        if names.contains(&self.dependent) {
            return Err(EstimatorError::InvalidSpec(format!(
                "dependent `{}` is also a regressor",
                self.dependent
            )));
        }
        Ok(())
    }
}

/// Free-function form of [`RegressionSpec::with_time_effects`].
pub fn with_time_effects(spec: RegressionSpec, periods: &[i32]) -> RegressionSpec {
    spec.with_time_effects(periods)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Estimator {
    Ols,
    Fgls,
    AndersonHsiao,
}

/// First-stage diagnostics for one instrumented column.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstStage {
    pub column: String,
    pub f_stat: f64,
    pub weak: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaldTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionResult {
    pub estimator: Estimator,
    pub dependent: String,
    pub names: Vec<String>,
    pub beta: DVector<f64>,
    pub cov_beta: DMatrix<f64>,
    pub std_errors: Vec<f64>,
    pub p_values: Vec<f64>,
    /// Residuals in panel layout; `None` where the observation was dropped.
    pub residuals: Grid,
    pub rho_hat: Option<f64>,
    pub unit_rho: Option<Vec<f64>>,
    pub sigma_hat: Option<Vec<f64>>,
    /// Innovation variance scale from the weighted residual sum of squares over `n - p`.
    pub sigma2: f64,
    pub wald: WaldTest,
    pub r_squared: f64,
    pub n: usize,
    pub p: usize,
    pub n_units: usize,
    pub n_periods: usize,
    pub time_effects: bool,
    pub first_stage: Vec<FirstStage>,
    pub warnings: Vec<String>,
}

impl RegressionResult {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn coef(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.beta[i])
    }

    pub fn p_value(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.p_values[i])
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.std_errors[i])
    }

    /// Coefficient names other than the intercept.
    pub fn slope_names(&self) -> Vec<&str> {
        self.names
            .iter()
            .map(String::as_str)
            .filter(|n| *n != INTERCEPT)
            .collect()
    }

    /// Residual grid rows: one `Vec<Option<f64>>` per unit.
    pub fn residual_rows(&self) -> Vec<Vec<Option<f64>>> {
        self.residuals
            .chunks(self.n_periods)
            .map(<[_]>::to_vec)
            .collect()
    }
}

/// Joint Wald test that the named coefficients are all zero.
pub fn wald_joint(result: &RegressionResult, subset: &[&str]) -> Result<WaldTest> {
    if subset.is_empty() {
        return Err(EstimatorError::InvalidSpec(
            "empty coefficient subset".into(),
        ));
    }
    let idx: Vec<usize> = subset
        .iter()
        .map(|n| {
            result.index_of(n).ok_or_else(|| {
                EstimatorError::InvalidSpec(format!("coefficient `{n}` not in result"))
            })
        })
        .collect::<Result<_>>()?;
    wald_from_parts(&result.beta, &result.cov_beta, &idx)
}

pub(crate) fn wald_from_parts(
    beta: &DVector<f64>,
    cov: &DMatrix<f64>,
    idx: &[usize],
) -> Result<WaldTest> {
    let k = idx.len();
    let b = DVector::from_iterator(k, idx.iter().map(|&i| beta[i]));
    let v = DMatrix::from_fn(k, k, |r, c| cov[(idx[r], idx[c])]);
    let chol = v.cholesky().ok_or(EstimatorError::SingularSubCovariance)?;
    let statistic = b.dot(&chol.solve(&b));
    if !statistic.is_finite() {
        return Err(EstimatorError::SingularSubCovariance);
    }
    Ok(WaldTest {
        statistic,
        dof: k,
        p_value: chi2_sf(statistic, k),
    })
}

pub(crate) fn chi2_sf(x: f64, dof: usize) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(dof as f64).expect("positive dof").sf(x)
}

/// Two-sided standard normal p-value.
pub fn normal_two_sided(z: f64) -> f64 {
    if !z.is_finite() {
        return if z.is_nan() { f64::NAN } else { 0.0 };
    }
    let n = Normal::standard();
    (2.0 * n.sf(z.abs())).min(1.0)
}

/// Rows of a panel regression after listwise deletion.
#[derive(Debug, Clone)]
pub(crate) struct Design {
    pub y: DVector<f64>,
    pub x: DMatrix<f64>,
    pub names: Vec<String>,
    /// (unit, period) position of each row, unit-major order.
    pub obs: Vec<(usize, usize)>,
}

type Column<'a> = Box<dyn Fn(usize, usize) -> Option<f64> + 'a>;

pub(crate) fn build_design(panel: &PanelDataset, spec: &RegressionSpec) -> Result<Design> {
    spec.validate()?;
    let t = panel.n_periods();
    let y_grid = panel.grid(&spec.dependent)?;
    let mut columns: Vec<Column<'_>> = Vec::new();
    let mut names = Vec::new();
    if spec.intercept {
        columns.push(Box::new(|_, _| Some(1.0)));
        names.push(INTERCEPT.to_string());
    }
    for r in &spec.regressors {
        match r {
            Regressor::Variable(v) => {
                let g = panel.grid(v)?;
                columns.push(Box::new(move |u, p| g[u * t + p]));
            }
            Regressor::PeriodDummy(year) => {
                let pos = panel
                    .periods()
                    .iter()
                    .position(|p| p == year)
                    .ok_or_else(|| {
                        EstimatorError::InvalidSpec(format!("period {year} not in panel"))
                    })?;
                columns.push(Box::new(move |_, p| Some(if p == pos { 1.0 } else { 0.0 })));
            }
        }
        names.push(r.name());
    }
    let mut obs = Vec::new();
    let mut ys = Vec::new();
    let mut xs = Vec::new();
    for u in 0..panel.n_units() {
        for p in 0..t {
            let Some(y) = y_grid[u * t + p] else { continue };
            let row: Option<Vec<f64>> = columns.iter().map(|c| c(u, p)).collect();
            if let Some(row) = row {
                obs.push((u, p));
                ys.push(y);
                xs.extend(row);
            }
        }
    }
    let n = obs.len();
    let k = names.len();
    if n <= k {
        return Err(EstimatorError::InsufficientObservations { n, p: k });
    }
    Ok(Design {
        y: DVector::from_vec(ys),
        x: DMatrix::from_row_slice(n, k, &xs),
        names,
        obs,
    })
}

/// Rejects designs with a column (nearly) spanned by earlier columns,
/// reporting the latest such column in spec order.
pub(crate) fn check_rank(x: &DMatrix<f64>, names: &[String]) -> Result<()> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut weakest: Option<(usize, f64)> = None;
    for j in 0..x.ncols() {
        let col = x.column(j).into_owned();
        let norm = col.norm();
        let mut r = col.clone();
        // two Gram-Schmidt passes
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&r);
                r.axpy(-c, q, 1.0);
            }
        }
        let rel = if norm > 0.0 { r.norm() / norm } else { 0.0 };
        if rel <= COLLINEARITY_TOL {
            let coefs = least_squares_coefficients(&x.columns(0, j).into_owned(), &col);
            let collinear_with = (0..j)
                .filter(|&i| coefs.as_ref().is_some_and(|c| c[i].abs() > 1e-8))
                .map(|i| names[i].clone())
                .collect();
            return Err(EstimatorError::RankDeficient {
                column: names[j].clone(),
                collinear_with,
            });
        }
        if weakest.is_none_or(|(_, w)| rel <= w) {
            weakest = Some((j, rel));
        }
        basis.push(r / (rel * norm));
    }
    let scaled = DMatrix::from_fn(x.nrows(), x.ncols(), |r, c| {
        let norm = x.column(c).norm();
        x[(r, c)] / norm
    });
    let sv = scaled.singular_values();
    let cond = sv.max() / sv.min();
    if !cond.is_finite() || cond > MAX_CONDITION {
        let (j, _) = weakest.expect("non-empty design");
        return Err(EstimatorError::RankDeficient {
            column: names[j].clone(),
            collinear_with: names[..j].to_vec(),
        });
    }
    Ok(())
}

fn least_squares_coefficients(x: &DMatrix<f64>, y: &DVector<f64>) -> Option<DVector<f64>> {
    if x.ncols() == 0 {
        return None;
    }
    x.clone().svd(true, true).solve(y, 1e-12).ok()
}

/// Least-squares fit by Householder QR.
#[derive(Debug, Clone)]
pub(crate) struct LsFit {
    pub beta: DVector<f64>,
    /// `(X'X)^-1`.
    pub xtx_inv: DMatrix<f64>,
    pub fitted: DVector<f64>,
    pub rss: f64,
}

pub(crate) fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Option<LsFit> {
    let qr = x.clone().qr();
    let r = qr.r();
    let qty = qr.q().transpose() * y;
    let beta = r.solve_upper_triangular(&qty)?;
    let k = x.ncols();
    let r_inv = r.solve_upper_triangular(&DMatrix::identity(k, k))?;
    let xtx_inv = &r_inv * r_inv.transpose();
    let fitted = x * &beta;
    let rss = (y - &fitted).norm_squared();
    Some(LsFit {
        beta,
        xtx_inv: symmetrize(xtx_inv),
        fitted,
        rss,
    })
}

pub(crate) fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

pub(crate) fn residual_grid(
    n_units: usize,
    n_periods: usize,
    obs: &[(usize, usize)],
    resid: &DVector<f64>,
) -> Grid {
    let mut g = vec![None; n_units * n_periods];
    for (k, &(u, p)) in obs.iter().enumerate() {
        g[u * n_periods + p] = Some(resid[k]);
    }
    g
}

/// Standard errors, normal p-values and the all-slopes Wald test.
pub(crate) fn inference(
    names: &[String],
    beta: &DVector<f64>,
    cov: &DMatrix<f64>,
) -> Result<(Vec<f64>, Vec<f64>, WaldTest)> {
    let se: Vec<f64> = (0..beta.len())
        .map(|i| cov[(i, i)].max(0.0).sqrt())
        .collect();
    let p: Vec<f64> = beta
        .iter()
        .zip(&se)
        .map(|(b, s)| normal_two_sided(b / s))
        .collect();
    let slopes: Vec<usize> = (0..names.len())
        .filter(|&i| names[i] != INTERCEPT)
        .collect();
    let wald = if slopes.is_empty() {
        WaldTest {
            statistic: 0.0,
            dof: 0,
            p_value: 1.0,
        }
    } else {
        // exact fits leave a zero covariance; report the test as undefined
        wald_from_parts(beta, cov, &slopes).unwrap_or(WaldTest {
            statistic: f64::NAN,
            dof: slopes.len(),
            p_value: f64::NAN,
        })
    };
    Ok((se, p, wald))
}

pub(crate) fn centered_r_squared(y: &DVector<f64>, rss: f64) -> f64 {
    let mean = y.mean();
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if tss > 0.0 {
        1.0 - rss / tss
    } else {
        0.0
    }
}
