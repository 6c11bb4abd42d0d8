use gvc_carbon::estimators::*;
use gvc_carbon::panel::{DeriveKind, LogBase, PanelDataset};
use gvc_carbon::synth;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;

fn units(n: usize) -> Vec<String> {
    (0..n).map(|u| format!("U{u}")).collect()
}

/// Positive levels `y`, `x1`, `x2` for a log-log regression.
fn level_panel(seed: u64, n: usize, t: usize) -> PanelDataset {
    let mut rng = synth::rng(seed);
    let mut cols = vec![Vec::new(), Vec::new(), Vec::new()];
    for _ in 0..n * t {
        let x1: f64 = rng.random_range(1.0..50.0);
        let x2: f64 = rng.random_range(0.5..5.0);
        let y = 3.0 * x1.powf(0.4) * x2.powf(-0.7) * rng.random_range(0.8..1.25);
        cols[0].push(y);
        cols[1].push(x1);
        cols[2].push(x2);
    }
    let mut p = PanelDataset::new(units(n), (1..=t as i32).collect()).unwrap();
    for (name, c) in ["y", "x1", "x2"].into_iter().zip(cols) {
        p = p.with_raw(name, c).unwrap();
    }
    p
}

fn logs(p: &PanelDataset) -> PanelDataset {
    ["y", "x1", "x2"].iter().fold(p.clone(), |q, v| {
        q.derive(DeriveKind::Log(LogBase::Ten), &[v], &format!("l{v}"))
            .unwrap()
    })
}

fn spec() -> RegressionSpec {
    RegressionSpec::new("ly", &["lx1", "lx2"])
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min()
}

/// Explicit design and response for a pooled regression, in unit-major order.
fn design(p: &PanelDataset) -> (DMatrix<f64>, DVector<f64>) {
    let n = p.cells();
    let (y, a, b) = (
        p.grid("ly").unwrap(),
        p.grid("lx1").unwrap(),
        p.grid("lx2").unwrap(),
    );
    let x = DMatrix::from_fn(n, 3, |r, c| match c {
        0 => 1.0,
        1 => a[r].unwrap(),
        _ => b[r].unwrap(),
    });
    (x, DVector::from_fn(n, |r, _| y[r].unwrap()))
}

#[test]
fn anderson_hsiao_matches_hand_rolled_two_stages() {
    #[rustfmt::skip]
    let y = [
        1.0, 1.7, 2.9, 3.1, 4.8, 5.2,
        0.5, 0.9, 2.2, 2.0, 3.7, 4.1,
        2.0, 2.4, 2.3, 3.9, 4.4, 6.0,
    ];
    #[rustfmt::skip]
    let x = [
        0.3, 0.8, 0.6, 1.9, 1.1, 2.5,
        1.0, 1.2, 2.1, 1.7, 2.9, 3.0,
        0.1, 0.9, 0.4, 1.3, 2.2, 1.8,
    ];
    let p = PanelDataset::new(units(3), (1..=6).collect())
        .unwrap()
        .with_raw("y", y.to_vec())
        .unwrap()
        .with_raw("x", x.to_vec())
        .unwrap();
    let got = anderson_hsiao(&p, &AndersonHsiaoSpec::new("y", &["x"])).unwrap();

    // rows t = 3..5 (0-based): dy_t on [1, dy_{t-1}, dx_t], dy_{t-1} instrumented by dy_{t-2}
    let (mut rows_x, mut rows_z, mut ys) = (Vec::new(), Vec::new(), Vec::new());
    for u in 0..3 {
        let yy = &y[u * 6..u * 6 + 6];
        let xx = &x[u * 6..u * 6 + 6];
        for t in 3..6 {
            ys.push(yy[t] - yy[t - 1]);
            rows_x.extend([1.0, yy[t - 1] - yy[t - 2], xx[t] - xx[t - 1]]);
            rows_z.extend([1.0, yy[t - 2] - yy[t - 3], xx[t] - xx[t - 1]]);
        }
    }
    let n = ys.len();
    let xm = DMatrix::from_row_slice(n, 3, &rows_x);
    let zm = DMatrix::from_row_slice(n, 3, &rows_z);
    let yv = DVector::from_vec(ys);
    let gamma = (zm.transpose() * &zm).try_inverse().unwrap() * zm.transpose() * xm.column(1);
    let mut xhat = xm.clone();
    xhat.set_column(1, &(&zm * gamma));
    let beta = (xhat.transpose() * &xhat).try_inverse().unwrap() * xhat.transpose() * &yv;

    assert_eq!(got.n, 9);
    for (name, want) in [("const", beta[0]), ("L.y", beta[1]), ("D.x", beta[2])] {
        let b = got.coef(name).unwrap();
        assert!((b - want).abs() <= 1e-10, "{name}: {b} vs {want}");
    }
    assert!(min_eigenvalue(&got.cov_beta) >= -1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn iid_fgls_is_ols(seed in any::<u64>(), n in 2usize..6, t in 3usize..10) {
        let p = logs(&level_panel(seed, n, t));
        let a = ols(&p, &spec()).unwrap();
        let b = fgls_ar1(&p, &spec().scheme(CovarianceScheme::Iid)).unwrap();
        for (x, y) in a.beta.iter().zip(b.beta.iter()) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn rescaling_a_level_moves_only_the_intercept(seed in any::<u64>(), c in 1e-3..1e3f64, iid in any::<bool>()) {
        let raw = level_panel(seed, 4, 8);
        let scaled: Vec<f64> = raw.grid("x1").unwrap().iter().map(|v| v.unwrap() * c).collect();
        let rescaled = PanelDataset::new(units(4), (1..=8).collect())
            .unwrap()
            .with_raw("y", raw.grid("y").unwrap().iter().map(|v| v.unwrap()).collect())
            .unwrap()
            .with_raw("x1", scaled)
            .unwrap()
            .with_raw("x2", raw.grid("x2").unwrap().iter().map(|v| v.unwrap()).collect())
            .unwrap();
        let s = if iid { spec().scheme(CovarianceScheme::Iid) } else { spec() };
        let a = fgls_ar1(&logs(&raw), &s).unwrap();
        let b = fgls_ar1(&logs(&rescaled), &s).unwrap();
        for name in ["lx1", "lx2"] {
            prop_assert!((a.coef(name).unwrap() - b.coef(name).unwrap()).abs() <= 1e-10);
        }
        let shift = a.coef("lx1").unwrap() * c.log10();
        prop_assert!((a.coef("const").unwrap() - b.coef("const").unwrap() - shift).abs() <= 1e-9);
    }

    #[test]
    fn ols_gradient_vanishes(seed in any::<u64>(), n in 2usize..6, t in 3usize..10) {
        let p = logs(&level_panel(seed, n, t));
        let r = ols(&p, &spec()).unwrap();
        let (x, y) = design(&p);
        let rss = |b: &DVector<f64>| (&y - &x * b).norm_squared();
        let beta = DVector::from_vec(["const", "lx1", "lx2"].iter().map(|k| r.coef(k).unwrap()).collect());
        let h = 1e-6;
        let total = rss(&beta);
        for j in 0..3 {
            let (mut up, mut down) = (beta.clone(), beta.clone());
            up[j] += h;
            down[j] -= h;
            let g = (rss(&up) - rss(&down)) / (2.0 * h);
            prop_assert!(g.abs() <= 1e-6 * (1.0 + total), "gradient {g} at {j}");
        }
    }

    #[test]
    fn coefficient_covariance_is_psd(seed in any::<u64>(), rho in -0.8..0.8f64) {
        let mut rng = synth::rng(seed);
        let p = synth::ar1_panel(&mut rng, 6, 12, rho, (1.0, 2.0), 1.0);
        let s = RegressionSpec::new("y", &["x"]);
        // per-unit rho on twelve periods can leave the unit interval; only accepted fits count
        for r in [ols(&p, &s), fgls_ar1(&p, &s), fgls_ar1(&p, &s.clone().per_unit_rho(true))].into_iter().flatten() {
            prop_assert!(min_eigenvalue(&r.cov_beta) >= -1e-10);
        }
        let d = synth::dynamic_panel(&mut rng, 6, 10, 0.4, 1.0);
        let iv = anderson_hsiao(&d, &AndersonHsiaoSpec::new("y", &["x"])).unwrap();
        prop_assert!(min_eigenvalue(&iv.cov_beta) >= -1e-10);
    }
}
