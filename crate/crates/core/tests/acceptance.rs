//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::path::Path;
use std::time::Instant;

use gvc_carbon::diagnostics::{pesaran_cd, RankBasis};
use gvc_carbon::estimators::{
    anderson_hsiao, fgls_ar1, ols, AndersonHsiaoSpec, CovarianceScheme, InstrumentVariant,
    RegressionSpec,
};
use gvc_carbon::ingest::{ModelOptions, Sample};
use gvc_carbon::mrio::*;
use gvc_carbon::panel::{vars, LogBase, PanelDataset};
use gvc_carbon::report::{
    cd_table, descriptive_table, prepare_panel, rank_report, run_model, Inputs, ModelId, Table,
};
use gvc_carbon::synth::{self, CalibratedModel};
use nalgebra::{DMatrix, DVector};

struct Outcome {
    passed: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn neumann(a: &DMatrix<f64>, terms: usize) -> DMatrix<f64> {
    let n = a.nrows();
    let (mut sum, mut power) = (DMatrix::identity(n, n), DMatrix::identity(n, n));
    for _ in 1..terms {
        power = &power * a;
        sum += &power;
    }
    sum
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

fn leontief_oracle() -> Outcome {
    let start = Instant::now();
    let (mut off, mut worst, mut worst_residual) = (Vec::new(), 0.0f64, 0.0f64);
    for seed in 0..200u64 {
        let dim = 1 + seed as usize % 12;
        let a = synth::random_productive_matrix(&mut synth::rng(seed), dim, 0.9);
        let idx =
            BlockIndex::new(&(0..dim).map(|i| format!("C{i:02}")).collect::<Vec<_>>(), 1).unwrap();
        let m = TechnicalCoefficients::from_matrix(a.clone(), idx)
            .unwrap()
            .leontief_inverse()
            .unwrap();
        let gap = (m.inverse() - neumann(&a, 100)).abs().max();
        worst = worst.max(gap);
        worst_residual = worst_residual.max(m.residual());
        if gap > 1e-7 {
            let c = (0..dim).map(|j| a.column(j).sum()).fold(0.0, f64::max);
            off.push(format!(
                "seed {seed} dim {dim}: gap {gap:.2e}, series tail bound {:.2e}",
                c.powi(100) / (1.0 - c)
            ));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let passed = off.is_empty() && worst_residual <= 1e-8 && secs < 5.0;
    let mut detail = format!(
        "200 matrices, max |B - S_100| {worst:.2e}, max residual {worst_residual:.2e}, {secs:.2}s"
    );
    if !off.is_empty() {
        detail.push_str(&format!("; {} above 1e-7: {}", off.len(), off.join("; ")));
    }
    outcome(passed, detail)
}

fn conservation() -> Outcome {
    let (mut worst_total, mut worst_split) = (0.0f64, 0.0f64);
    for seed in 0..50u64 {
        let mut rng = synth::rng(1000 + seed);
        let (n, k) = (2 + seed as usize % 4, 1 + seed as usize % 3);
        let t = synth::random_icio(&mut rng, n, k).unwrap();
        let intensity = EmissionIntensity::new(synth::random_intensity(&mut rng, n * k)).unwrap();
        let m = build_coefficients(&t).unwrap().leontief_inverse().unwrap();
        worst_total = worst_total.max(
            conservation_check(&t, &m, &intensity)
                .unwrap()
                .relative_gap(),
        );
        let ex = t.all_gross_exports();
        for c in t.countries() {
            let rows = t.index().range(c).unwrap();
            let trade = DMatrix::from_fn(
                t.dim(),
                1,
                |j, _| if rows.contains(&j) { ex[j] } else { 0.0 },
            );
            let all = embodied_emissions(&intensity, m.inverse(), &trade)
                .unwrap()
                .sum();
            let d = domestic_co2_exports(&intensity, &m, &t, c).unwrap().total;
            let f = foreign_co2_exports(&intensity, &m, &t, c).unwrap().total;
            worst_split = worst_split.max(rel(d + f, all));
        }
    }
    outcome(
        worst_total <= 1e-8 && worst_split <= 1e-9,
        format!("50 worlds, production vs consumption {worst_total:.2e}, domestic + foreign vs total {worst_split:.2e}"),
    )
}

fn variance(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
}

fn fgls_efficiency() -> Outcome {
    let start = Instant::now();
    let spec = RegressionSpec::new("y", &["x"]);
    let (mut b_ols, mut b_fgls, mut rhos) = (Vec::new(), Vec::new(), Vec::new());
    let mut collapse = 0.0f64;
    for rep in 0..500u64 {
        let p = synth::ar1_panel(&mut synth::rng(2000 + rep), 16, 24, 0.6, (1.0, 2.0), 1.0);
        let o = ols(&p, &spec).unwrap();
        let f = fgls_ar1(&p, &spec).unwrap();
        let iid = fgls_ar1(&p, &spec.clone().scheme(CovarianceScheme::Iid)).unwrap();
        collapse = collapse.max((&o.beta - &iid.beta).amax());
        b_ols.push(o.coef("x").unwrap());
        b_fgls.push(f.coef("x").unwrap());
        rhos.push(f.rho_hat.unwrap());
    }
    let secs = start.elapsed().as_secs_f64();
    let (vo, vf) = (variance(&b_ols), variance(&b_fgls));
    let rho_mean = rhos.iter().sum::<f64>() / rhos.len() as f64;
    outcome(
        collapse <= 1e-10 && vf <= 1.05 * vo && (rho_mean - 0.6).abs() <= 0.08 && secs < 60.0,
        format!(
            "iid vs OLS {collapse:.1e}, slope var FGLS {vf:.5} vs OLS {vo:.5}, mean rho {rho_mean:.4}, {secs:.1}s"
        ),
    )
}

fn cd_size() -> Outcome {
    let mut stats = Vec::new();
    for rep in 0..1000u64 {
        let r = synth::independent_residuals(&mut synth::rng(3000 + rep), 16, 24);
        stats.push(pesaran_cd(&r).unwrap().statistic);
    }
    let rejections = stats.iter().filter(|s| s.abs() > 1.959964).count();
    let rate = rejections as f64 / stats.len() as f64;
    let mean = stats.iter().sum::<f64>() / stats.len() as f64;
    outcome(
        (0.03..=0.07).contains(&rate) && mean.abs() <= 0.1,
        format!(
            "1000 reps, 5% rejection rate {:.1}%, mean CD {mean:.4}",
            100.0 * rate
        ),
    )
}

/// Noise-free `y_t = mu + a y_{t-1} + g x_t` on 16 units and 24 periods.
fn exact_dynamic_panel(alpha: f64, gamma: f64) -> PanelDataset {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for u in 0..16 {
        let mut y = 1.0 + u as f64;
        for t in 0..24 {
            let x = ((3 * t + 5 * u) as f64).sin() + 0.05 * (t * t) as f64 / 24.0;
            y = 0.3 * u as f64 + alpha * y + gamma * x;
            xs.push(x);
            ys.push(y);
        }
    }
    PanelDataset::new(
        (0..16).map(|u| format!("U{u:02}")).collect(),
        (1..=24).collect(),
    )
    .unwrap()
    .with_raw("x", xs)
    .unwrap()
    .with_raw("y", ys)
    .unwrap()
}

fn two_stage_fixture_gap() -> f64 {
    let y = [
        1.0, 1.7, 2.9, 3.1, 4.8, 5.2, 0.5, 0.9, 2.2, 2.0, 3.7, 4.1, 2.0, 2.4, 2.3, 3.9, 4.4, 6.0,
    ];
    let x = [
        0.3, 0.8, 0.6, 1.9, 1.1, 2.5, 1.0, 1.2, 2.1, 1.7, 2.9, 3.0, 0.1, 0.9, 0.4, 1.3, 2.2, 1.8,
    ];
    let p = PanelDataset::new(vec!["A".into(), "B".into(), "C".into()], (1..=6).collect())
        .unwrap()
        .with_raw("y", y.to_vec())
        .unwrap()
        .with_raw("x", x.to_vec())
        .unwrap();
    let got = anderson_hsiao(&p, &AndersonHsiaoSpec::new("y", &["x"])).unwrap();
    let (mut xr, mut zr, mut ys) = (Vec::new(), Vec::new(), Vec::new());
    for u in 0..3 {
        let (yy, xx) = (&y[u * 6..u * 6 + 6], &x[u * 6..u * 6 + 6]);
        for t in 3..6 {
            ys.push(yy[t] - yy[t - 1]);
            xr.extend([1.0, yy[t - 1] - yy[t - 2], xx[t] - xx[t - 1]]);
            zr.extend([1.0, yy[t - 2] - yy[t - 3], xx[t] - xx[t - 1]]);
        }
    }
    let n = ys.len();
    let (xm, zm, yv) = (
        DMatrix::from_row_slice(n, 3, &xr),
        DMatrix::from_row_slice(n, 3, &zr),
        DVector::from_vec(ys),
    );
    let gamma = (zm.transpose() * &zm).try_inverse().unwrap() * zm.transpose() * xm.column(1);
    let mut xhat = xm.clone();
    xhat.set_column(1, &(&zm * gamma));
    let beta = (xhat.transpose() * &xhat).try_inverse().unwrap() * xhat.transpose() * &yv;
    ["const", "L.y", "D.x"]
        .iter()
        .enumerate()
        .map(|(i, k)| (got.coef(k).unwrap() - beta[i]).abs())
        .fold(0.0, f64::max)
}

fn monte_carlo_alphas(variant: InstrumentVariant) -> Vec<f64> {
    let spec = AndersonHsiaoSpec::new("y", &["x"]).instrument(variant);
    (0..500u64)
        .map(|rep| {
            let p = synth::dynamic_panel(&mut synth::rng(4000 + rep), 16, 24, 0.45, 1.0);
            anderson_hsiao(&p, &spec).unwrap().coef("L.y").unwrap()
        })
        .collect()
}

fn mean_and_median(mut v: Vec<f64>) -> (f64, f64) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.sort_by(f64::total_cmp);
    (mean, v[v.len() / 2])
}

fn anderson_hsiao_recovery() -> Outcome {
    let spec = AndersonHsiaoSpec::new("y", &["x"]);
    let exact = anderson_hsiao(&exact_dynamic_panel(0.45, 0.8), &spec).unwrap();
    let exact_err = (exact.coef("L.y").unwrap() - 0.45).abs();
    // judged on the default instrument; the level variant is reported alongside
    let (mean, median) = mean_and_median(monte_carlo_alphas(InstrumentVariant::default()));
    let (level_mean, _) = mean_and_median(monte_carlo_alphas(InstrumentVariant::LaggedLevel));
    let fixture = two_stage_fixture_gap();
    outcome(
        exact_err <= 1e-8 && (mean - 0.45).abs() <= 0.05 && fixture <= 1e-10,
        format!(
            "noise-free error {exact_err:.1e}, 500 reps lagged-difference mean {mean:.4} (median {median:.4}), \
             lagged-level mean {level_mean:.4}, 3x6 fixture gap {fixture:.1e}"
        ),
    )
}

fn labels(t: &Table) -> Vec<&str> {
    t.rows.iter().map(|r| r.label.as_str()).collect()
}

fn table_shapes() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic");
    let inputs = Inputs::load(&dir.join("config.toml"), None).unwrap();
    let level = inputs.level_panel().unwrap();
    let panel = inputs.prepared_panel().unwrap();
    let (opts, sample) = (&inputs.config.model, &inputs.config.sample);
    let mut problems = Vec::new();
    let mut expect = |ok: bool, what: &str| {
        if !ok {
            problems.push(what.to_string());
        }
    };
    expect(
        level.n_units() == 16 && level.n_periods() == 24,
        "16 x 24 panel",
    );
    for id in [ModelId::Model1, ModelId::Model2] {
        let t = run_model(&panel, id, opts, sample).unwrap().table;
        let l = labels(&t);
        expect(
            l.len() == 8 && l[6] == "Wald Chi Square" && l[7] == "No. of Cross Sections",
            "model rows",
        );
        expect(
            t.rows[..6].iter().all(|r| r.beneath.is_some()),
            "six coefficient rows",
        );
        expect(t.rows[7].cells == ["16"], "cross-section count");
    }
    let t8 = run_model(&panel, ModelId::Table8, opts, sample)
        .unwrap()
        .table;
    let last = t8.rows.last().unwrap();
    expect(
        last.label == "No of time periods" && last.cells[0] == "24",
        "fixed-effects footer",
    );
    let t9 = run_model(&panel, ModelId::Table9, opts, sample)
        .unwrap()
        .table;
    expect(
        labels(&t9).last() == Some(&"No. of Observations"),
        "dynamic footer",
    );
    let (cd, _) = cd_table(&panel).unwrap();
    expect(cd.rows.len() == 2, "two dependence rows");
    let stats = descriptive_table(&panel, None).unwrap();
    expect(
        stats.rows.len() == 10 && stats.rows.iter().all(|r| r.cells[0] == "384"),
        "Obs = 384",
    );
    let ranks = rank_report(
        &level,
        2018,
        RankBasis::ShareOfGrossExports,
        RankBasis::Level,
    )
    .unwrap();
    expect(
        ranks.rows.len() == 16 && ranks.columns.len() == 5,
        "rank table",
    );
    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            "model1/model2 8 rows, table8 footer 24 periods, cd 2 rows, stats Obs 384, ranks 16 x 5"
                .into()
        } else {
            format!("wrong: {}", problems.join(", "))
        },
    )
}

fn sign_pattern() -> Outcome {
    let noise = CalibratedModel::Domestic
        .calibration()
        .anchored_noise_sd()
        .expect("domestic spread exceeds fit");
    let sample = Sample {
        countries: (0..16).map(|u| format!("U{u:02}")).collect(),
        oecd: vec![],
    };
    let opts = ModelOptions::default();
    let reps = 500u64;
    let mut parts = Vec::new();
    let mut passed = true;
    for (model, id) in [
        (CalibratedModel::Domestic, ModelId::Model1),
        (CalibratedModel::Foreign, ModelId::Model2),
    ] {
        let cal = model.calibration();
        let gvc = format!("log_{}", cal.gvc);
        let required = [
            gvc.clone(),
            format!("log_{}", vars::TO),
            format!("log_{}", vars::MFG),
        ];
        let (mut each, mut joint) = ([0usize; 3], 0usize);
        for rep in 0..reps {
            let raw = synth::calibrated_panel(&mut synth::rng(5000 + rep), model, 16, 24, noise);
            let p = prepare_panel(&raw, LogBase::Ten, None).unwrap();
            let r = &run_model(&p, id, &opts, &sample).unwrap().columns[0].result;
            let signs: Vec<bool> = required.iter().map(|k| r.coef(k).unwrap() > 0.0).collect();
            for (c, s) in each.iter_mut().zip(&signs) {
                *c += usize::from(*s);
            }
            joint += usize::from(signs.iter().all(|s| *s));
        }
        let freq = joint as f64 / reps as f64;
        passed &= freq >= 0.95;
        parts.push(format!(
            "{id}: joint {:.1}% (GVC {:.1}%, TO {:.1}%, MFG {:.1}%)",
            100.0 * freq,
            100.0 * each[0] as f64 / reps as f64,
            100.0 * each[1] as f64 / reps as f64,
            100.0 * each[2] as f64 / reps as f64,
        ));
    }
    outcome(
        passed,
        format!(
            "noise s.d. {noise:.3}, {reps} draws each; {}",
            parts.join("; ")
        ),
    )
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 Leontief inverse vs Neumann series", leontief_oracle),
        ("2 emission conservation", conservation),
        ("3 FGLS collapse and efficiency", fgls_efficiency),
        ("4 CD size under independence", cd_size),
        ("5 Anderson-Hsiao recovery", anderson_hsiao_recovery),
        ("6 table shapes on bundled data", table_shapes),
        ("7 calibrated sign pattern", sign_pattern),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        failed += usize::from(!o.passed);
        println!(
            "{} criterion {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {} of 7 passed", 7 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
