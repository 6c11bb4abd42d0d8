use nalgebra::{DMatrix, DVector};

use super::ols::fit_ols;
use super::{
    build_design, centered_r_squared, check_rank, inference, least_squares, residual_grid, Design,
    Estimator, EstimatorError, RegressionResult, RegressionSpec, Result,
};
use crate::panel::PanelDataset;

/// Feasible GLS with AR(1) disturbances and per-unit innovation variances.
///
/// OLS residuals give a pooled (or per-unit) AR(1) coefficient, each unit's
/// rows are Prais-Winsten transformed and scaled by the unit's innovation
/// standard deviation, and least squares on the whitened rows yields
/// `(X' Phi^-1 X)^-1 X' Phi^-1 y`. A gap inside a unit's series starts a new
/// AR segment.
pub fn fgls_ar1(panel: &PanelDataset, spec: &RegressionSpec) -> Result<RegressionResult> {
    let design = build_design(panel, spec)?;
    let first = fit_ols(panel, spec, &design)?;
    if !spec.scheme.autocorrelated() && !spec.scheme.heteroscedastic() {
        return Ok(RegressionResult {
            estimator: Estimator::Fgls,
            ..first
        });
    }
    if panel.n_periods() < 3 {
        return Err(EstimatorError::InsufficientPeriods {
            needed: 3,
            got: panel.n_periods(),
        });
    }

    let n_units = panel.n_units();
    let resid = &design.y - &design.x * &first.beta;
    let runs = unit_runs(&design);

    let unit_rho: Vec<f64> = if !spec.scheme.autocorrelated() {
        vec![0.0; n_units]
    } else if spec.per_unit_rho {
        (0..n_units)
            .map(|u| ar1_coefficient(&resid, &runs[u..u + 1]))
            .collect::<Result<_>>()?
    } else {
        vec![ar1_coefficient(&resid, &runs)?; n_units]
    };

    let sigma2: Vec<f64> = if spec.scheme.heteroscedastic() {
        (0..n_units)
            .map(|u| {
                let w = whiten_vector(&resid, &runs[u], unit_rho[u]);
                if w.is_empty() {
                    return Ok(1.0);
                }
                let s2 = w.iter().map(|v| v * v).sum::<f64>() / w.len() as f64;
                if s2 > 0.0 && s2.is_finite() {
                    Ok(s2)
                } else {
                    Err(EstimatorError::DegenerateVariance(panel.units()[u].clone()))
                }
            })
            .collect::<Result<_>>()?
    } else {
        vec![1.0; n_units]
    };

    let (n, p) = design.x.shape();
    let mut xs = DMatrix::zeros(n, p);
    let mut ys = DVector::zeros(n);
    let mut row = 0;
    for u in 0..n_units {
        let scale = sigma2[u].sqrt();
        for run in &runs[u] {
            for (k, &i) in run.iter().enumerate() {
                let rho = unit_rho[u];
                if k == 0 {
                    let a = (1.0 - rho * rho).sqrt() / scale;
                    ys[row] = a * design.y[i];
                    xs.row_mut(row).copy_from(&(design.x.row(i) * a));
                } else {
                    let prev = run[k - 1];
                    ys[row] = (design.y[i] - rho * design.y[prev]) / scale;
                    xs.row_mut(row)
                        .copy_from(&((design.x.row(i) - design.x.row(prev) * rho) / scale));
                }
                row += 1;
            }
        }
    }
    debug_assert_eq!(row, n);

    check_rank(&xs, &design.names)?;
    let fit = least_squares(&xs, &ys).ok_or_else(|| EstimatorError::RankDeficient {
        column: design.names.last().cloned().unwrap_or_default(),
        collinear_with: vec![],
    })?;
    let sigma2_fpls = fit.rss / (n - p) as f64;
    let cov = &fit.xtx_inv * sigma2_fpls;
    let (std_errors, p_values, wald) = inference(&design.names, &fit.beta, &cov)?;
    let structural = &design.y - &design.x * &fit.beta;
    let rss = structural.norm_squared();

    Ok(RegressionResult {
        estimator: Estimator::Fgls,
        dependent: spec.dependent.clone(),
        names: design.names.clone(),
        beta: fit.beta,
        cov_beta: cov,
        std_errors,
        p_values,
        residuals: residual_grid(n_units, panel.n_periods(), &design.obs, &structural),
        rho_hat: spec
            .scheme
            .autocorrelated()
            .then(|| pooled_or_mean(&unit_rho, spec.per_unit_rho)),
        unit_rho: (spec.scheme.autocorrelated() && spec.per_unit_rho).then_some(unit_rho),
        sigma_hat: spec.scheme.heteroscedastic().then_some(sigma2),
        sigma2: sigma2_fpls,
        wald,
        r_squared: centered_r_squared(&design.y, rss),
        n,
        p,
        n_units,
        n_periods: panel.n_periods(),
        time_effects: spec.time_effects,
        first_stage: vec![],
        warnings: vec![],
    })
}

fn pooled_or_mean(rho: &[f64], per_unit: bool) -> f64 {
    if per_unit {
        rho.iter().sum::<f64>() / rho.len() as f64
    } else {
        rho[0]
    }
}

/// Design row indices per unit, split into runs of consecutive periods.
fn unit_runs(design: &Design) -> Vec<Vec<Vec<usize>>> {
    let n_units = design.obs.iter().map(|o| o.0 + 1).max().unwrap_or(0);
    let mut runs: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n_units];
    let mut prev: Option<(usize, usize)> = None;
    for (i, &(u, p)) in design.obs.iter().enumerate() {
        match prev {
            Some((pu, pp)) if pu == u && pp + 1 == p => {
                runs[u].last_mut().expect("open run").push(i)
            }
            _ => runs[u].push(vec![i]),
        }
        prev = Some((u, p));
    }
    runs
}

/// `sum u_t u_{t-1} / sum u_{t-1}^2` over consecutive pairs.
fn ar1_coefficient(resid: &DVector<f64>, runs: &[Vec<Vec<usize>>]) -> Result<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for unit in runs {
        for run in unit {
            for w in run.windows(2) {
                num += resid[w[1]] * resid[w[0]];
                den += resid[w[0]] * resid[w[0]];
            }
        }
    }
    if den == 0.0 {
        return Ok(0.0);
    }
    let rho = num / den;
    if !rho.is_finite() || rho.abs() >= 1.0 {
        return Err(EstimatorError::NonStationaryRho(rho));
    }
    Ok(rho)
}

fn whiten_vector(v: &DVector<f64>, runs: &[Vec<usize>], rho: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for run in runs {
        for (k, &i) in run.iter().enumerate() {
            out.push(if k == 0 {
                (1.0 - rho * rho).sqrt() * v[i]
            } else {
                v[i] - rho * v[run[k - 1]]
            });
        }
    }
    out
}
