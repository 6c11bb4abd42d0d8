//! Seeded synthetic data: random productive economies, simulated panels for
//! the estimators, and the bundled 16-economy demonstration world.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::ingest::{IndicatorPanel, IndicatorRecord};
use crate::mrio::{IcioTable, MrioError};
use crate::panel::{vars, PanelDataset};

pub type SynthRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SynthRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(rng: &mut SynthRng) -> f64 {
    StandardNormal.sample(rng)
}

/// Nonnegative matrix whose column sums lie in `(0, max_col_sum]`, so its
/// spectral radius is at most `max_col_sum`. Roughly a third of the
/// entries are zero.
pub fn random_productive_matrix(rng: &mut SynthRng, dim: usize, max_col_sum: f64) -> DMatrix<f64> {
    let mut a = DMatrix::from_fn(dim, dim, |_, _| {
        if rng.random::<f64>() < 0.33 {
            0.0
        } else {
            rng.random::<f64>()
        }
    });
    for j in 0..dim {
        let target = max_col_sum * rng.random_range(0.05..=1.0);
        let s: f64 = a.column(j).sum();
        if s == 0.0 {
            a[(j, j)] = target;
        } else {
            a.column_mut(j).scale_mut(target / s);
        }
    }
    a
}

/// A balanced closed-world ICIO table: final demand is drawn first and gross
/// output solves `x = A x + f`.
pub fn random_icio(
    rng: &mut SynthRng,
    countries: usize,
    industries: usize,
) -> Result<IcioTable, MrioError> {
    let codes: Vec<String> = (0..countries).map(country_code).collect();
    let inds: Vec<String> = (0..industries).map(|k| format!("I{k}")).collect();
    let dim = countries * industries;
    let a = random_productive_matrix(rng, dim, 0.8);
    let f = DMatrix::from_fn(dim, countries, |_, _| rng.random_range(1.0..100.0));
    let total_f: DVector<f64> = f.column_sum();
    let b = (DMatrix::identity(dim, dim) - &a)
        .try_inverse()
        .expect("productive by construction");
    let x = &b * total_f;
    let z = &a * DMatrix::from_diagonal(&x);
    IcioTable::new(codes, inds, z, f, x)
}

/// Random nonnegative emission intensities, a few of them zero.
pub fn random_intensity(rng: &mut SynthRng, dim: usize) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| {
        if rng.random::<f64>() < 0.1 {
            0.0
        } else {
            rng.random_range(0.0..2.0)
        }
    })
}

fn country_code(i: usize) -> String {
    let a = (b'A' + (i / 26 % 26) as u8) as char;
    let b = (b'A' + (i % 26) as u8) as char;
    format!("C{a}{b}")
}

fn units(n: usize) -> Vec<String> {
    (0..n).map(|u| format!("U{u:02}")).collect()
}

/// Stationary AR(1) draw of length `t` with innovation s.d. `sigma`.
fn ar1_series(rng: &mut SynthRng, t: usize, rho: f64, sigma: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(t);
    let mut u = normal(rng) * sigma / (1.0 - rho * rho).sqrt();
    out.push(u);
    for _ in 1..t {
        u = rho * u + sigma * normal(rng);
        out.push(u);
    }
    out
}

/// `y = b0 + b1 x + u` with `x` iid N(0, 1) and `u` a stationary AR(1) per
/// unit. Variables `x`, `y`.
pub fn ar1_panel(
    rng: &mut SynthRng,
    n: usize,
    t: usize,
    rho: f64,
    beta: (f64, f64),
    sigma: f64,
) -> PanelDataset {
    let mut xs = Vec::with_capacity(n * t);
    let mut ys = Vec::with_capacity(n * t);
    for _ in 0..n {
        let u = ar1_series(rng, t, rho, sigma);
        for ut in u {
            let x = normal(rng);
            xs.push(x);
            ys.push(beta.0 + beta.1 * x + ut);
        }
    }
    PanelDataset::new(units(n), (1..=t as i32).collect())
        .and_then(|p| p.with_raw("x", xs))
        .and_then(|p| p.with_raw("y", ys))
        .expect("well-formed simulated panel")
}

/// `y_it = mu_i + alpha y_{i,t-1} + gamma x_it + e_it`, with `x` a
/// persistent exogenous AR(1) and a burn-in of 50 periods discarded.
/// Variables `x`, `y`.
pub fn dynamic_panel(
    rng: &mut SynthRng,
    n: usize,
    t: usize,
    alpha: f64,
    gamma: f64,
) -> PanelDataset {
    const BURN: usize = 50;
    let mut xs = Vec::with_capacity(n * t);
    let mut ys = Vec::with_capacity(n * t);
    for _ in 0..n {
        let mu = normal(rng);
        let mut x = 0.0;
        let mut y = mu / (1.0 - alpha);
        for s in 0..BURN + t {
            x = 0.5 * x + normal(rng);
            y = mu + alpha * y + gamma * x + normal(rng);
            if s >= BURN {
                xs.push(x);
                ys.push(y);
            }
        }
    }
    PanelDataset::new(units(n), (1..=t as i32).collect())
        .and_then(|p| p.with_raw("x", xs))
        .and_then(|p| p.with_raw("y", ys))
        .expect("well-formed simulated panel")
}

/// Independent standard normal residual rows.
pub fn independent_residuals(rng: &mut SynthRng, n: usize, t: usize) -> Vec<Vec<Option<f64>>> {
    (0..n)
        .map(|_| (0..t).map(|_| Some(normal(rng))).collect())
        .collect()
}

/// Which export-emissions model a calibrated panel imitates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalibratedModel {
    /// Domestic CO2 on forward participation.
    Domestic,
    /// Foreign CO2 on backward participation.
    Foreign,
}

/// Moments of the base-10 log regressors and the coefficients used by
/// [`calibrated_panel`].
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub dependent: &'static str,
    pub gvc: &'static str,
    /// Order: GVC, MFG, GDP, ESI, TO.
    pub mean: [f64; 5],
    pub sd: [f64; 5],
    pub corr: [[f64; 5]; 5],
    /// Order: GVC, GVC squared, GDP, MFG, ESI, TO.
    pub beta: [f64; 6],
    pub dependent_mean: f64,
    pub dependent_sd: f64,
}

impl CalibratedModel {
    pub fn calibration(self) -> Calibration {
        let (gvc_mean, gvc_sd, gvc_corr, beta, dependent, gvc, dependent_mean, dependent_sd) =
            match self {
                CalibratedModel::Domestic => (
                    7.394219,
                    0.510157,
                    [0.3139, -0.0329, 0.0722, 0.2484],
                    [0.22, 0.04, -0.01, 0.10, 0.02, 0.37],
                    vars::DOM_CO2,
                    vars::FWD_GVC,
                    1.790544,
                    0.585038,
                ),
                CalibratedModel::Foreign => (
                    7.316849,
                    0.469769,
                    [0.4915, 0.2336, 0.2971, 0.3823],
                    [0.19, 0.24, 0.09, 0.27, 0.01, 0.59],
                    vars::FOR_CO2,
                    vars::BWD_GVC,
                    1.173082,
                    0.456977,
                ),
            };
        let g = gvc_corr;
        Calibration {
            dependent,
            gvc,
            mean: [gvc_mean, 1.28459, 4.51045, 0.049934, 1.8758],
            sd: [gvc_sd, 0.119931, 1.329636, 0.453227, 0.235378],
            corr: [
                [1.0, g[0], g[1], g[2], g[3]],
                [g[0], 1.0, 0.1722, 0.3067, 0.5437],
                [g[1], 0.1722, 1.0, 0.3979, 0.1447],
                [g[2], 0.3067, 0.3979, 1.0, 0.638],
                [g[3], 0.5437, 0.1447, 0.638, 1.0],
            ],
            beta,
            dependent_mean,
            dependent_sd,
        }
    }
}

impl Calibration {
    fn covariance(&self) -> DMatrix<f64> {
        DMatrix::from_fn(5, 5, |i, j| self.corr[i][j] * self.sd[i] * self.sd[j])
    }

    /// Standard deviation of the noise-free dependent variable when the
    /// regressors are jointly normal with the calibrated moments.
    pub fn systematic_sd(&self) -> f64 {
        let cov = self.covariance();
        let b = self.beta;
        // linear coefficients in regressor order GVC, MFG, GDP, ESI, TO
        let a = DVector::from_row_slice(&[b[0], b[3], b[2], b[4], b[5]]);
        let (m, s2) = (self.mean[0], cov[(0, 0)]);
        let sa = &cov * &a;
        let var =
            a.dot(&sa) + b[1] * b[1] * (4.0 * m * m * s2 + 2.0 * s2 * s2) + 4.0 * b[1] * m * sa[0];
        var.sqrt()
    }

    /// Noise s.d. that brings the dependent variable's spread to
    /// `dependent_sd`; `None` when the coefficients alone already exceed it.
    pub fn anchored_noise_sd(&self) -> Option<f64> {
        let gap = self.dependent_sd.powi(2) - self.systematic_sd().powi(2);
        (gap > 0.0).then(|| gap.sqrt())
    }
}

/// Level-valued panel whose base-10 logs have the calibrated means,
/// standard deviations and correlations, with the dependent variable
/// generated from the calibrated coefficients plus AR(1) noise.
///
/// Each regressor mixes a persistent unit component with an AR(1) time
/// component; `noise_sd` is the stationary s.d. of the log-scale error.
pub fn calibrated_panel(
    rng: &mut SynthRng,
    model: CalibratedModel,
    n: usize,
    t: usize,
    noise_sd: f64,
) -> PanelDataset {
    let cal = model.calibration();
    let l = cal
        .covariance()
        .cholesky()
        .expect("calibrated correlation is positive definite")
        .l();
    let (unit_weight, phi, rho) = (0.5_f64, 0.8_f64, 0.5_f64);
    let b = cal.beta;
    let intercept = cal.dependent_mean
        - (b[0] * cal.mean[0]
            + b[1] * (cal.mean[0].powi(2) + cal.sd[0].powi(2))
            + b[2] * cal.mean[2]
            + b[3] * cal.mean[1]
            + b[4] * cal.mean[3]
            + b[5] * cal.mean[4]);

    let mut cols: Vec<Vec<f64>> = (0..6).map(|_| Vec::with_capacity(n * t)).collect();
    for _ in 0..n {
        let unit: Vec<f64> = (0..5).map(|_| normal(rng)).collect();
        let time: Vec<Vec<f64>> = (0..5)
            .map(|_| ar1_series(rng, t, phi, (1.0 - phi * phi).sqrt()))
            .collect();
        let noise = ar1_series(rng, t, rho, noise_sd * (1.0 - rho * rho).sqrt());
        for s in 0..t {
            let z = DVector::from_fn(5, |k, _| {
                unit_weight.sqrt() * unit[k] + (1.0 - unit_weight).sqrt() * time[k][s]
            });
            let x = DVector::from_row_slice(&cal.mean) + &l * z;
            let (gvc, mfg, gdp, esi, to) = (x[0], x[1], x[2], x[3], x[4]);
            let y = intercept
                + b[0] * gvc
                + b[1] * gvc * gvc
                + b[2] * gdp
                + b[3] * mfg
                + b[4] * esi
                + b[5] * to
                + noise[s];
            for (k, v) in [y, gvc, gdp, mfg, esi, to].into_iter().enumerate() {
                cols[k].push(10f64.powf(v));
            }
        }
    }
    let names = [
        cal.dependent,
        cal.gvc,
        vars::GDP,
        vars::MFG,
        vars::ESI,
        vars::TO,
    ];
    let mut panel =
        PanelDataset::new(units(n), (1995..1995 + t as i32).collect()).expect("dimensions");
    for (name, col) in names.into_iter().zip(cols) {
        panel = panel.with_raw(name, col).expect("finite levels");
    }
    panel
}

/// ISO codes and OECD membership of the sixteen sample economies.
pub const SAMPLE: [(&str, bool); 16] = [
    ("BRA", false),
    ("CHN", false),
    ("CZE", true),
    ("HUN", true),
    ("IDN", false),
    ("IND", false),
    ("ISR", true),
    ("KOR", true),
    ("POL", true),
    ("PRT", true),
    ("RUS", false),
    ("SVN", true),
    ("THA", false),
    ("TUR", true),
    ("VNM", false),
    ("ZAF", false),
];
pub const REST_OF_WORLD: &str = "ROW";
pub const INDUSTRIES: [&str; 3] = ["D01T03", "D10T12", "D24"];
pub const FIRST_YEAR: i32 = 1995;
pub const LAST_YEAR: i32 = 2018;
/// Seed of the bundled dataset.
pub const BUNDLED_SEED: u64 = 20_181_995;

/// One year of the bundled world.
#[derive(Debug, Clone)]
pub struct WorldYear {
    pub icio: IcioTable,
    /// Direct emissions per row, tonnes.
    pub emissions: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct BundledWorld {
    pub years: Vec<WorldYear>,
    pub indicators: IndicatorPanel,
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

fn round4(v: f64) -> f64 {
    (v * 10_000.0).round() / 10_000.0
}

struct CountryTraits {
    size: f64,
    growth: f64,
    home_bias: f64,
    openness_trend: f64,
    intensity: f64,
    decarbonization: f64,
}

/// Deterministic 16 economies + rest of world, three industries, 1995-2018.
#[allow(clippy::needless_range_loop)]
pub fn bundled_world(seed: u64) -> BundledWorld {
    let mut rng = rng(seed);
    let mut countries: Vec<String> = SAMPLE.iter().map(|(c, _)| c.to_string()).collect();
    countries.push(REST_OF_WORLD.into());
    let n = countries.len();
    let k = INDUSTRIES.len();
    let dim = n * k;

    let traits: Vec<CountryTraits> = (0..n)
        .map(|c| {
            let row = c == n - 1;
            CountryTraits {
                size: if row {
                    4.0e9
                } else {
                    10f64.powf(rng.random_range(7.3..8.9))
                },
                growth: if row {
                    0.025
                } else {
                    rng.random_range(0.01..0.08)
                },
                home_bias: rng.random_range(0.72..0.9),
                openness_trend: rng.random_range(0.0..0.12),
                intensity: if row {
                    1.0
                } else {
                    10f64.powf(rng.random_range(-0.4..0.5))
                },
                decarbonization: rng.random_range(0.005..0.03),
            }
        })
        .collect();
    // input share of buyer industry k supplied by industry k'
    let input_mix = [[0.12, 0.18, 0.05], [0.06, 0.14, 0.08], [0.04, 0.05, 0.30]];
    let final_mix = [0.25, 0.55, 0.20];
    let base_intensity = [0.35, 0.12, 1.4];

    let mut years = Vec::new();
    let mut records = Vec::new();
    let indicator_base: Vec<[f64; 7]> = (0..n)
        .map(|_| {
            [
                10f64.powf(rng.random_range(2.9..4.4)),
                rng.random_range(11.0..30.0),
                rng.random_range(0.3..2.0),
                rng.random_range(30.0..120.0),
                rng.random_range(6.0..60.0),
                rng.random_range(2.0..45.0),
                rng.random_range(10.0..480.0),
            ]
        })
        .collect();

    for year in FIRST_YEAR..=LAST_YEAR {
        let tau = (year - FIRST_YEAR) as f64;
        let size: Vec<f64> = traits
            .iter()
            .map(|tr| tr.size * (1.0 + tr.growth).powf(tau))
            .collect();
        let world: f64 = size.iter().sum();
        let partner_share = |supplier: usize, buyer: usize| size[supplier] / (world - size[buyer]);

        let mut a = DMatrix::zeros(dim, dim);
        for d in 0..n {
            let home = (traits[d].home_bias - traits[d].openness_trend * tau / 23.0).max(0.5);
            for kb in 0..k {
                let j = d * k + kb;
                for s in 0..n {
                    let share = if s == d {
                        home
                    } else {
                        (1.0 - home) * partner_share(s, d)
                    };
                    for ks in 0..k {
                        let noise = (0.05 * normal(&mut rng)).exp();
                        a[(s * k + ks, j)] = input_mix[ks][kb] * share * noise;
                    }
                }
            }
        }
        let mut f = DMatrix::zeros(dim, n);
        for d in 0..n {
            let demand = 0.6 * size[d];
            let home = 0.85 - 0.05 * tau / 23.0;
            for s in 0..n {
                let share = if s == d {
                    home
                } else {
                    (1.0 - home) * partner_share(s, d)
                };
                for ks in 0..k {
                    let noise = (0.05 * normal(&mut rng)).exp();
                    f[(s * k + ks, d)] = round2(demand * final_mix[ks] * share * noise);
                }
            }
        }
        let b = (DMatrix::identity(dim, dim) - &a)
            .try_inverse()
            .expect("column sums below one");
        let x = &b * f.column_sum();
        let mut z = &a * DMatrix::from_diagonal(&x);
        z.apply(|v| *v = round2(*v));
        let x = DVector::from_fn(dim, |i, _| z.row(i).sum() + f.row(i).sum());
        let icio = IcioTable::new(
            countries.clone(),
            INDUSTRIES.iter().map(|s| s.to_string()).collect(),
            z,
            f,
            x,
        )
        .expect("balanced by construction")
        .with_year(year)
        .with_vintage("synthetic-1");
        let emissions = DVector::from_fn(dim, |i, _| {
            let (c, ki) = (i / k, i % k);
            let tr = &traits[c];
            let e = base_intensity[ki]
                * tr.intensity
                * (1.0 - tr.decarbonization).powf(tau)
                * (0.03 * normal(&mut rng)).exp();
            round2(e * icio.output()[i])
        });
        years.push(WorldYear { icio, emissions });

        for (c, code) in countries.iter().enumerate().take(n - 1) {
            let base = &indicator_base[c];
            let tr = &traits[c];
            let wiggle = |rng: &mut SynthRng, s: f64| (s * normal(rng)).exp();
            let values = [
                base[0] * (1.0 + tr.growth).powf(tau) * wiggle(&mut rng, 0.03),
                base[1] * (1.0 - 0.004 * tau) * wiggle(&mut rng, 0.04),
                (base[2] * (1.0 + 0.05 * tau) * wiggle(&mut rng, 0.1)).clamp(0.06, 5.0),
                base[3] * (1.0 + tr.openness_trend * tau / 23.0) * wiggle(&mut rng, 0.05),
                (base[4] * (1.0 - 0.003 * tau) * wiggle(&mut rng, 0.01)).min(68.0),
                (base[5] * (1.0 + 0.01 * tau) * wiggle(&mut rng, 0.05)).min(80.0),
                base[6] * (1.0 + 0.012 * tau) * wiggle(&mut rng, 0.005),
            ];
            for ((var, unit), v) in vars::INDICATOR_VARIABLES
                .iter()
                .zip(INDICATOR_UNITS)
                .zip(values)
            {
                records.push(IndicatorRecord {
                    country: code.clone(),
                    year,
                    variable: var.to_string(),
                    value: round4(v),
                    unit: unit.into(),
                });
            }
        }
    }
    BundledWorld {
        years,
        indicators: IndicatorPanel::from_records(records).expect("unique keys"),
    }
}

/// Run configuration for the bundled files; paths are relative to the
/// directory holding it.
pub fn bundled_config() -> String {
    let quote = |v: Vec<&str>| {
        v.iter()
            .map(|c| format!("\"{c}\""))
            .collect::<Vec<_>>()
            .join(", ")
    };
    format!(
        "[data]\n\
         icio = \"icio/icio_{{year}}.csv\"\n\
         emissions = \"emissions/emissions_{{year}}.csv\"\n\
         indicators = \"indicators.csv\"\n\
         first_year = {FIRST_YEAR}\n\
         last_year = {LAST_YEAR}\n\
         \n\
         [sample]\n\
         countries = [{}]\n\
         oecd = [{}]\n\
         \n\
         [model]\n\
         log_base = \"10\"\n\
         fgls_scheme = \"ar1+panel-heteroscedastic\"\n\
         instrument = \"lagged-difference\"\n\
         vintage = \"synthetic-1\"\n",
        quote(SAMPLE.iter().map(|s| s.0).collect()),
        quote(SAMPLE.iter().filter(|s| s.1).map(|s| s.0).collect()),
    )
}

/// Relative path and contents of every bundled input file.
pub fn bundled_files(world: &BundledWorld) -> Vec<(String, String)> {
    let mut out = vec![("config.toml".to_string(), bundled_config())];
    for y in &world.years {
        let year = y.icio.year().expect("bundled years are set");
        out.push((
            format!("icio/icio_{year}.csv"),
            crate::ingest::render_icio(&y.icio),
        ));
        out.push((
            format!("emissions/emissions_{year}.csv"),
            crate::ingest::render_emissions(&y.icio, &y.emissions),
        ));
    }
    out.push((
        "indicators.csv".into(),
        crate::ingest::render_indicator_panel(&world.indicators),
    ));
    out
}

const INDICATOR_UNITS: [&str; 7] = [
    "USD per capita",
    "% of GDP",
    "index 0-6",
    "% of GDP",
    "% of land area",
    "% of final energy",
    "people per km2",
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mrio::{
        build_coefficients, conservation_check, EmbodiedAccounts, EmissionIntensity,
    };

    #[test]
    fn productive_matrices_have_small_column_sums() {
        let mut r = rng(1);
        for dim in 1..8 {
            let a = random_productive_matrix(&mut r, dim, 0.9);
            assert!(a.iter().all(|v| *v >= 0.0));
            assert!(a.row_sum().iter().all(|s| *s <= 0.9 + 1e-12));
        }
    }

    #[test]
    fn random_icio_is_balanced() {
        let t = random_icio(&mut rng(7), 3, 2).unwrap();
        assert_eq!(t.dim(), 6);
        assert!(t.value_added().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn bundled_world_is_deterministic_and_closed() {
        let a = bundled_world(BUNDLED_SEED);
        let b = bundled_world(BUNDLED_SEED);
        assert_eq!(a.years.len(), 24);
        assert_eq!(a.indicators.len(), 16 * 24 * 7);
        assert_eq!(
            a.years[3].icio.intermediate(),
            b.years[3].icio.intermediate()
        );
        let y = &a.years[0];
        let model = build_coefficients(&y.icio)
            .unwrap()
            .leontief_inverse()
            .unwrap();
        let e = EmissionIntensity::from_emissions(&y.emissions, y.icio.output()).unwrap();
        assert!(
            conservation_check(&y.icio, &model, &e)
                .unwrap()
                .relative_gap()
                < 1e-8
        );
        let acc = EmbodiedAccounts::compute(&y.icio, &model, &e).unwrap();
        assert!(acc.country_total("CHN").unwrap().forward_gvc > 0.0);
    }

    #[test]
    fn calibrated_moments() {
        let p = calibrated_panel(&mut rng(3), CalibratedModel::Domestic, 16, 24, 0.05);
        assert_eq!(p.cells(), 384);
        let logs: Vec<f64> = p
            .grid(vars::FWD_GVC)
            .unwrap()
            .iter()
            .map(|v| v.unwrap().log10())
            .collect();
        let mean = logs.iter().sum::<f64>() / 384.0;
        assert!((mean - 7.394219).abs() < 0.3, "{mean}");
    }

    #[test]
    fn systematic_spread_matches_simulation() {
        for model in [CalibratedModel::Domestic, CalibratedModel::Foreign] {
            let cal = model.calibration();
            let p = calibrated_panel(&mut rng(11), model, 400, 50, 0.0);
            let y: Vec<f64> = p
                .grid(cal.dependent)
                .unwrap()
                .iter()
                .map(|v| v.unwrap().log10())
                .collect();
            let m = y.iter().sum::<f64>() / y.len() as f64;
            let sd = (y.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (y.len() - 1) as f64).sqrt();
            assert!(
                (sd / cal.systematic_sd() - 1.0).abs() < 0.05,
                "{sd} vs {}",
                cal.systematic_sd()
            );
        }
        assert!(CalibratedModel::Domestic
            .calibration()
            .anchored_noise_sd()
            .is_some());
        assert!(CalibratedModel::Foreign
            .calibration()
            .anchored_noise_sd()
            .is_none());
    }
}
