use super::{
    build_design, centered_r_squared, check_rank, inference, least_squares, residual_grid, Design,
    Estimator, EstimatorError, RegressionResult, RegressionSpec, Result,
};
use crate::panel::PanelDataset;

/// Pooled OLS with the classical covariance `s^2 (X'X)^-1`.
pub fn ols(panel: &PanelDataset, spec: &RegressionSpec) -> Result<RegressionResult> {
    let design = build_design(panel, spec)?;
    fit_ols(panel, spec, &design)
}

pub(super) fn fit_ols(
    panel: &PanelDataset,
    spec: &RegressionSpec,
    design: &Design,
) -> Result<RegressionResult> {
    check_rank(&design.x, &design.names)?;
    let fit = least_squares(&design.x, &design.y).ok_or_else(|| EstimatorError::RankDeficient {
        column: design.names.last().cloned().unwrap_or_default(),
        collinear_with: vec![],
    })?;
    let (n, p) = design.x.shape();
    let sigma2 = fit.rss / (n - p) as f64;
    let cov = &fit.xtx_inv * sigma2;
    let (std_errors, p_values, wald) = inference(&design.names, &fit.beta, &cov)?;
    let resid = &design.y - &fit.fitted;
    Ok(RegressionResult {
        estimator: Estimator::Ols,
        dependent: spec.dependent.clone(),
        names: design.names.clone(),
        beta: fit.beta,
        cov_beta: cov,
        std_errors,
        p_values,
        residuals: residual_grid(panel.n_units(), panel.n_periods(), &design.obs, &resid),
        rho_hat: None,
        unit_rho: None,
        sigma_hat: None,
        sigma2,
        wald,
        r_squared: centered_r_squared(&design.y, fit.rss),
        n,
        p,
        n_units: panel.n_units(),
        n_periods: panel.n_periods(),
        time_effects: spec.time_effects,
        first_stage: vec![],
        warnings: vec![],
    })
}
