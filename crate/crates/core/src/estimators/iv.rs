use nalgebra::{DMatrix, DVector};

use super::{
    check_rank, inference, least_squares, residual_grid, Estimator, EstimatorError, FirstStage,
    InstrumentVariant, RegressionResult, Result, INTERCEPT, WEAK_INSTRUMENT_F,
};
use crate::panel::PanelDataset;

/// First-differenced dynamic panel regression
/// `dy_t = a dy_{t-1} + dx_t'g (+ c) + de_t`, estimated by 2SLS.
#[derive(Debug, Clone, PartialEq)]
pub struct AndersonHsiaoSpec {
    pub dependent: String,
    /// Level variables; each enters as its first difference.
    pub regressors: Vec<String>,
    /// Regressor instrumented alongside the lagged dependent variable.
    pub instrumented: Option<String>,
    pub instrument: InstrumentVariant,
    pub intercept: bool,
}

impl AndersonHsiaoSpec {
    pub fn new<S: AsRef<str>>(dependent: &str, regressors: &[S]) -> Self {
        Self {
            dependent: dependent.into(),
            regressors: regressors.iter().map(|r| r.as_ref().to_string()).collect(),
            instrumented: None,
            instrument: InstrumentVariant::LaggedDifference,
            intercept: true,
        }
    }

    pub fn instrumenting(mut self, regressor: &str) -> Self {
        self.instrumented = Some(regressor.into());
        self
    }

    pub fn instrument(mut self, variant: InstrumentVariant) -> Self {
        self.instrument = variant;
        self
    }

    pub fn without_intercept(mut self) -> Self {
        self.intercept = false;
        self
    }

    /// Coefficient name of the lagged differenced dependent variable.
    pub fn lagged_name(&self) -> String {
        format!("L.{}", self.dependent)
    }

    /// Coefficient name of a differenced regressor.
    pub fn diff_name(regressor: &str) -> String {
        format!("D.{regressor}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoStageFit {
    pub beta: DVector<f64>,
    pub cov_beta: DMatrix<f64>,
    /// Structural residuals `y - X b`.
    pub residuals: DVector<f64>,
    /// `X b`.
    pub fitted: DVector<f64>,
    pub sigma2: f64,
    /// Partial first-stage F for each endogenous column, in the order given.
    pub first_stage_f: Vec<f64>,
}

/// Two-stage least squares. Columns of `x` listed in `endogenous` are
/// replaced by their projection on `[x_exogenous | excluded]`.
pub fn two_stage_least_squares(
    y: &DVector<f64>,
    x: &DMatrix<f64>,
    names: &[String],
    endogenous: &[usize],
    excluded: &DMatrix<f64>,
) -> Result<TwoStageFit> {
    let (n, p) = x.shape();
    if excluded.ncols() < endogenous.len() {
        return Err(EstimatorError::InvalidSpec(format!(
            "{} excluded instruments for {} endogenous columns",
            excluded.ncols(),
            endogenous.len()
        )));
    }
    let exog: Vec<usize> = (0..p).filter(|j| !endogenous.contains(j)).collect();
    let kz = exog.len() + excluded.ncols();
    if n <= kz.max(p) {
        return Err(EstimatorError::InsufficientObservations { n, p: kz.max(p) });
    }
    let mut z = DMatrix::zeros(n, kz);
    for (k, &j) in exog.iter().enumerate() {
        z.set_column(k, &x.column(j));
    }
    for k in 0..excluded.ncols() {
        z.set_column(exog.len() + k, &excluded.column(k));
    }
    let z_names: Vec<String> = exog
        .iter()
        .map(|&j| names[j].clone())
        .chain((0..excluded.ncols()).map(|k| format!("instrument_{k}")))
        .collect();
    check_rank(&z, &z_names)?;

    let z_exog = DMatrix::from_fn(n, exog.len(), |r, c| x[(r, exog[c])]);
    let mut x_hat = x.clone();
    let mut first_stage_f = Vec::with_capacity(endogenous.len());
    for &j in endogenous {
        let col = x.column(j).into_owned();
        let full = least_squares(&z, &col).ok_or(EstimatorError::SingularSubCovariance)?;
        let rss_r = if exog.is_empty() {
            col.norm_squared()
        } else {
            least_squares(&z_exog, &col)
                .ok_or(EstimatorError::SingularSubCovariance)?
                .rss
        };
        let q = excluded.ncols() as f64;
        let f = ((rss_r - full.rss) / q) / (full.rss / (n - kz) as f64);
        first_stage_f.push(if full.rss > 0.0 { f } else { f64::INFINITY });
        x_hat.set_column(j, &full.fitted);
    }

    check_rank(&x_hat, names)?;
    let second = least_squares(&x_hat, y).ok_or_else(|| EstimatorError::RankDeficient {
        column: names.last().cloned().unwrap_or_default(),
        collinear_with: vec![],
    })?;
    let fitted = x * &second.beta;
    let residuals = y - &fitted;
    let sigma2 = residuals.norm_squared() / (n - p) as f64;
    Ok(TwoStageFit {
        cov_beta: &second.xtx_inv * sigma2,
        beta: second.beta,
        residuals,
        fitted,
        sigma2,
        first_stage_f,
    })
}

/// Anderson-Hsiao IV estimator. `dy_{t-1}` is instrumented by `dy_{t-2}`
/// (or `y_{t-2}`); the designated regressor's difference by `dx_{t-2}` (or
/// `x_{t-2}`). Rows with any unavailable input are dropped.
pub fn anderson_hsiao(panel: &PanelDataset, spec: &AndersonHsiaoSpec) -> Result<RegressionResult> {
    if spec.regressors.iter().any(|r| r == &spec.dependent) {
        return Err(EstimatorError::InvalidSpec(format!(
            "dependent `{}` is also a regressor",
            spec.dependent
        )));
    }
    for (i, r) in spec.regressors.iter().enumerate() {
        if spec.regressors[..i].contains(r) {
            return Err(EstimatorError::InvalidSpec(format!(
                "regressor `{r}` listed twice"
            )));
        }
    }
    let inst_pos = match &spec.instrumented {
        Some(v) => Some(spec.regressors.iter().position(|r| r == v).ok_or_else(|| {
            EstimatorError::InvalidSpec(format!("instrumented `{v}` is not among the regressors"))
        })?),
        None => None,
    };
    let depth = match spec.instrument {
        InstrumentVariant::LaggedDifference => 3,
        InstrumentVariant::LaggedLevel => 2,
    };
    let t_len = panel.n_periods();
    if t_len < depth + 1 {
        return Err(EstimatorError::InsufficientPeriods {
            needed: depth + 1,
            got: t_len,
        });
    }

    let yg = panel.grid(&spec.dependent)?;
    let xg: Vec<_> = spec
        .regressors
        .iter()
        .map(|r| panel.grid(r))
        .collect::<std::result::Result<_, _>>()?;
    let level = |g: &[Option<f64>], u: usize, t: usize| g[u * t_len + t];
    let diff = |g: &[Option<f64>], u: usize, t: usize| Some(level(g, u, t)? - level(g, u, t - 1)?);
    let inst = |g: &[Option<f64>], u: usize, t: usize| match spec.instrument {
        InstrumentVariant::LaggedDifference => diff(g, u, t - 2),
        InstrumentVariant::LaggedLevel => level(g, u, t - 2),
    };

    let mut names = Vec::new();
    if spec.intercept {
        names.push(INTERCEPT.to_string());
    }
    names.push(spec.lagged_name());
    names.extend(
        spec.regressors
            .iter()
            .map(|r| AndersonHsiaoSpec::diff_name(r)),
    );
    let offset = usize::from(spec.intercept);
    let lag_col = offset;
    let mut endogenous = vec![lag_col];
    if let Some(k) = inst_pos {
        endogenous.push(offset + 1 + k);
    }

    let mut obs = Vec::new();
    let (mut ys, mut xs, mut zs) = (Vec::new(), Vec::new(), Vec::new());
    for u in 0..panel.n_units() {
        for t in depth..t_len {
            let row = (|| {
                let dy = diff(yg, u, t)?;
                let mut xr = Vec::with_capacity(names.len());
                if spec.intercept {
                    xr.push(1.0);
                }
                xr.push(diff(yg, u, t - 1)?);
                for g in &xg {
                    xr.push(diff(g, u, t)?);
                }
                let mut zr = vec![inst(yg, u, t)?];
                if let Some(k) = inst_pos {
                    zr.push(inst(xg[k], u, t)?);
                }
                Some((dy, xr, zr))
            })();
            if let Some((dy, xr, zr)) = row {
                obs.push((u, t));
                ys.push(dy);
                xs.extend(xr);
                zs.extend(zr);
            }
        }
    }
    let n = obs.len();
    let p = names.len();
    if n <= p + 1 {
        return Err(EstimatorError::InsufficientObservations { n, p });
    }
    let y = DVector::from_vec(ys);
    let x = DMatrix::from_row_slice(n, p, &xs);
    let z = DMatrix::from_row_slice(n, endogenous.len(), &zs);
    let fit = two_stage_least_squares(&y, &x, &names, &endogenous, &z)?;

    let (std_errors, p_values, wald) = inference(&names, &fit.beta, &fit.cov_beta)?;
    let mut warnings = Vec::new();
    let first_stage: Vec<FirstStage> = endogenous
        .iter()
        .zip(&fit.first_stage_f)
        .map(|(&j, &f)| {
            let weak = f < WEAK_INSTRUMENT_F;
            if weak {
                let msg = format!("weak instrument for `{}`: first-stage F = {f:.3}", names[j]);
                log::warn!("{msg}");
                warnings.push(msg);
            }
            FirstStage {
                column: names[j].clone(),
                f_stat: f,
                weak,
            }
        })
        .collect();

    Ok(RegressionResult {
        estimator: Estimator::AndersonHsiao,
        dependent: spec.dependent.clone(),
        names,
        r_squared: squared_correlation(&y, &fit.fitted),
        beta: fit.beta,
        cov_beta: fit.cov_beta,
        std_errors,
        p_values,
        residuals: residual_grid(panel.n_units(), t_len, &obs, &fit.residuals),
        rho_hat: None,
        unit_rho: None,
        sigma_hat: None,
        sigma2: fit.sigma2,
        wald,
        n,
        p,
        n_units: panel.n_units(),
        n_periods: t_len,
        time_effects: false,
        first_stage,
        warnings,
    })
}

fn squared_correlation(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let (ma, mb) = (a.mean(), b.mean());
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b.iter()) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    if saa > 0.0 && sbb > 0.0 {
        sab * sab / (saa * sbb)
    } else {
        0.0
    }
}
