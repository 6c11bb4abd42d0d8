use std::fmt;
use std::str::FromStr;

use super::{Row, Table};
use crate::diagnostics::{
    correlation_matrix, descriptive_stats, pesaran_cd_labeled, rank_table, CdReport,
    DiagnosticsError, RankBasis, RankInput, RankTable,
};
use crate::estimators::fmt_fixed;
use crate::estimators::{
    anderson_hsiao, fgls_ar1, ols, render_model, AndersonHsiaoSpec, CovarianceScheme,
    RegressionResult, RegressionSpec, Styling, INTERCEPT,
};
use crate::ingest::{ModelOptions, Sample};
use crate::panel::{vars, DeriveKind, LogBase, PanelDataset, PanelError};
use crate::Error;

type Result<T> = std::result::Result<T, Error>;

pub const LOG_PREFIX: &str = "log_";

const INTERACTED: [&str; 3] = [vars::FOR_COVER, vars::REN_ENERGY_CONS, vars::POP_DENSITY];

fn log(v: &str) -> String {
    format!("{LOG_PREFIX}{v}")
}

fn sq(v: &str) -> String {
    format!("{v}_sq")
}

fn inter(a: &str, b: &str) -> String {
    format!("{a}_x_{b}")
}

/// Adds the log of every known raw variable present in `panel`, the squared
/// log GVC measures and the log GVC x country-characteristic products.
/// Variables that already exist are left alone.
pub fn prepare_panel(
    panel: &PanelDataset,
    base: LogBase,
    esi_shift: Option<f64>,
) -> std::result::Result<PanelDataset, PanelError> {
    let mut p = panel.clone();
    let raw = vars::ACCOUNT_VARIABLES
        .iter()
        .chain(vars::INDICATOR_VARIABLES.iter());
    for &v in raw {
        if v == vars::GROSS_EXPORTS || !p.contains(v) {
            continue;
        }
        let kind = match esi_shift {
            Some(s) if v == vars::ESI => DeriveKind::ShiftedLog(base, s),
            _ => DeriveKind::Log(base),
        };
        p = p.derive_if_missing(kind, &[v], &log(v))?;
    }
    for gvc in [vars::FWD_GVC, vars::BWD_GVC] {
        let lg = log(gvc);
        if !p.contains(&lg) {
            continue;
        }
        p = p.derive_if_missing(DeriveKind::Square, &[&lg], &sq(&lg))?;
        for c in INTERACTED {
            let lc = log(c);
            if p.contains(&lc) {
                p = p.derive_if_missing(DeriveKind::Interaction, &[&lg, &lc], &inter(&lg, &lc))?;
            }
        }
    }
    Ok(p)
}

/// Display label for a panel or coefficient name.
pub fn label_for(name: &str) -> String {
    let base = name
        .strip_prefix("L.")
        .or_else(|| name.strip_prefix("D."))
        .unwrap_or(name);
    if let Some((a, b)) = base.split_once("_x_") {
        return format!(
            "{}*{}",
            label_for(a),
            raw_label(b.strip_prefix(LOG_PREFIX).unwrap_or(b)).to_uppercase()
        );
    }
    if let Some(inner) = base.strip_suffix("_sq") {
        return format!("({})²", label_for(inner));
    }
    if base == INTERCEPT {
        return "Constant".into();
    }
    raw_label(base.strip_prefix(LOG_PREFIX).unwrap_or(base)).to_string()
}

fn raw_label(v: &str) -> &str {
    match v {
        vars::FWD_GVC => "Forward GVC",
        vars::BWD_GVC => "Backward GVC",
        vars::DOM_CO2 => "Domestic CO2",
        vars::FOR_CO2 => "Foreign CO2",
        vars::ESI => "STR",
        vars::FOR_COVER => "For Cover",
        vars::REN_ENERGY_CONS => "Ren Energy Cons",
        vars::POP_DENSITY => "Pop Density",
        other => other,
    }
}

/// Long-form labels used by the fixed-effects and dynamic tables and the
/// appendix statistics.
fn long_label(v: &str) -> &str {
    match v.strip_prefix(LOG_PREFIX).unwrap_or(v) {
        vars::MFG => "Manufacturing share",
        vars::GDP => "GDP Per Capita",
        vars::TO => "Trade openness",
        vars::FWD_GVC => "Forward Participation",
        vars::BWD_GVC => "Backward Participation",
        vars::ESI => "Stringency Index",
        vars::DOM_CO2 => "Domestic Emissions",
        vars::FOR_CO2 => "Foreign Emissions",
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelId {
    Model1,
    Model2,
    Table6,
    Table7,
    Table8,
    Table9,
}

impl ModelId {
    pub const ALL: [ModelId; 6] = [
        ModelId::Model1,
        ModelId::Model2,
        ModelId::Table6,
        ModelId::Table7,
        ModelId::Table8,
        ModelId::Table9,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelId::Model1 => "model1",
            ModelId::Model2 => "model2",
            ModelId::Table6 => "table6",
            ModelId::Table7 => "table7",
            ModelId::Table8 => "table8",
            ModelId::Table9 => "table9",
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelId {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ModelId::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown model `{s}` (expected model1, model2, table6, table7, table8 or table9)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Domestic,
    Foreign,
}

impl Side {
    fn dependent(self) -> String {
        log(match self {
            Side::Domestic => vars::DOM_CO2,
            Side::Foreign => vars::FOR_CO2,
        })
    }

    fn gvc(self) -> String {
        log(match self {
            Side::Domestic => vars::FWD_GVC,
            Side::Foreign => vars::BWD_GVC,
        })
    }

    fn key(self) -> &'static str {
        match self {
            Side::Domestic => "domestic",
            Side::Foreign => "foreign",
        }
    }

    /// `[MFG, GDP, TO, GVC, STR]`, the row order of the fixed-effects and
    /// dynamic tables.
    fn fe_regressors(self) -> Vec<String> {
        vec![
            log(vars::MFG),
            log(vars::GDP),
            log(vars::TO),
            self.gvc(),
            log(vars::ESI),
        ]
    }
}

/// One estimated column of a rendered table.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelColumn {
    pub key: String,
    pub header: String,
    pub units: Vec<String>,
    pub result: RegressionResult,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelOutput {
    pub id: ModelId,
    pub columns: Vec<ModelColumn>,
    pub table: Table,
}

fn describe(estimator: &str, spec_dep: &str, regs: &[String], extra: &str) -> String {
    format!("{estimator}({spec_dep} ~ {}{extra})", regs.join(" + "))
}

fn fgls_column(
    panel: &PanelDataset,
    key: &str,
    header: &str,
    dep: &str,
    regs: &[String],
    opts: &ModelOptions,
    time_effects: bool,
) -> Result<ModelColumn> {
    let mut spec = RegressionSpec::new(dep, regs)
        .scheme(opts.fgls_scheme)
        .per_unit_rho(opts.per_unit_rho);
    let mut extra = format!("; scheme={}", scheme_name(opts.fgls_scheme));
    if opts.per_unit_rho {
        extra.push_str("; per-unit rho");
    }
    if time_effects {
        spec = spec.with_time_effects(panel.periods());
        extra.push_str("; time effects");
    }
    extra.push_str(&format!("; units={}", panel.units().join(" ")));
    let result = fgls_ar1(panel, &spec)?;
    Ok(ModelColumn {
        key: key.into(),
        header: header.into(),
        units: panel.units().to_vec(),
        source: describe("fgls_ar1", dep, regs, &extra),
        result,
    })
}

fn scheme_name(s: CovarianceScheme) -> &'static str {
    match s {
        CovarianceScheme::Iid => "iid",
        CovarianceScheme::PanelHeteroscedastic => "panel-heteroscedastic",
        CovarianceScheme::Ar1 => "ar1",
        CovarianceScheme::Ar1PanelHeteroscedastic => "ar1+panel-heteroscedastic",
    }
}

const SIGNIFICANCE_NOTES: [&str; 3] = [
    "** significant at the 5% level",
    "* significant at the 10% level",
    "p-values in brackets",
];

fn coef_row(label: &str, col: &ModelColumn, name: &str, column_key: &str, decimals: usize) -> Row {
    coef_rows(label, &[(col, name, column_key)], decimals, None)
}

/// One row whose cells are `(column, coefficient name, value column key)`
/// triples; missing coefficients render as blanks. `between` inserts a label
/// cell before every cell but the first (side-by-side layouts).
fn coef_rows(
    label: &str,
    cells: &[(&ModelColumn, &str, &str)],
    decimals: usize,
    between: Option<&[&str]>,
) -> Row {
    let styling = Styling {
        decimals,
        ..Styling::default()
    };
    let mut out_cells = Vec::new();
    let mut beneath = Vec::new();
    let mut values = Vec::new();
    let mut sources = Vec::new();
    for (i, (col, name, key)) in cells.iter().enumerate() {
        if let (Some(b), true) = (between, i > 0) {
            out_cells.push(b[i - 1].to_string());
            beneath.push(String::new());
        }
        let rendered = render_model(
            &col.result,
            &Styling {
                order: vec![name.to_string()],
                ..styling.clone()
            },
        );
        match rendered.first() {
            Some(r) => {
                out_cells.push(r.coefficient.clone());
                beneath.push(r.bracket.clone());
                values.push((name.to_string(), format!("{key}.coef"), r.estimate));
                values.push((name.to_string(), format!("{key}.p"), r.p_value));
                if !sources.contains(&col.source) {
                    sources.push(col.source.clone());
                }
            }
            None => {
                out_cells.push(String::new());
                beneath.push(String::new());
            }
        }
    }
    let mut row = Row::new(label, out_cells, sources.join(" | "));
    row.beneath = Some(beneath);
    for (r, c, v) in values {
        row = row.value(&r, &c, v);
    }
    row
}

/// A footer row with one statistic per column.
fn stat_row(
    label: &str,
    cols: &[&ModelColumn],
    key: &str,
    f: impl Fn(&RegressionResult) -> f64,
    render: impl Fn(f64) -> String,
    between: Option<&[&str]>,
) -> Row {
    let mut cells = Vec::new();
    let mut values = Vec::new();
    for (i, c) in cols.iter().enumerate() {
        if let (Some(b), true) = (between, i > 0) {
            cells.push(b[i - 1].to_string());
        }
        let v = f(&c.result);
        cells.push(render(v));
        values.push((c.key.clone(), v));
    }
    let sources: Vec<String> = cols.iter().map(|c| c.source.clone()).collect();
    let mut row = Row::new(label, cells, sources.join(" | "));
    for (col, v) in values {
        row = row.value(key, &col, v);
    }
    row
}

fn wald(r: &RegressionResult) -> f64 {
    r.wald.statistic
}

fn int(v: f64) -> String {
    format!("{v:.0}")
}

fn two(v: f64) -> String {
    fmt_fixed(v, 2)
}

/// Marginal elasticity of the dependent variable with respect to the log GVC
/// measure at its sample mean, for specifications with a squared term.
fn elasticity_note(panel: &PanelDataset, col: &ModelColumn, gvc: &str) -> Option<String> {
    let b1 = col.result.coef(gvc)?;
    let b2 = col.result.coef(&sq(gvc))?;
    let vals: Vec<f64> = panel.grid(gvc).ok()?.iter().flatten().copied().collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    Some(format!(
        "Elasticity with respect to {} at its sample mean ({}): {}",
        label_for(gvc),
        fmt_fixed(mean, 4),
        fmt_fixed(b1 + 2.0 * b2 * mean, 4)
    ))
}

/// Estimates one of the regression tables on a panel prepared by
/// [`prepare_panel`] and renders it.
pub fn run_model(
    panel: &PanelDataset,
    id: ModelId,
    opts: &ModelOptions,
    sample: &Sample,
) -> Result<ModelOutput> {
    match id {
        ModelId::Model1 => pooled_model(panel, id, Side::Domestic, opts),
        ModelId::Model2 => pooled_model(panel, id, Side::Foreign, opts),
        ModelId::Table6 => split_model(panel, id, Side::Domestic, opts, sample),
        ModelId::Table7 => split_model(panel, id, Side::Foreign, opts, sample),
        ModelId::Table8 => time_effects_model(panel, opts),
        ModelId::Table9 => dynamic_model(panel, opts),
    }
}

fn pooled_model(
    panel: &PanelDataset,
    id: ModelId,
    side: Side,
    opts: &ModelOptions,
) -> Result<ModelOutput> {
    let gvc = side.gvc();
    let regs = vec![
        gvc.clone(),
        sq(&gvc),
        log(vars::GDP),
        log(vars::MFG),
        log(vars::ESI),
        log(vars::TO),
    ];
    let dep = side.dependent();
    let col = fgls_column(panel, "model", "Coefficient", &dep, &regs, opts, false)?;
    let number = if side == Side::Domestic { 1 } else { 2 };
    let caption = format!(
        "MODEL {number}: {} = f ({})",
        label_for(&dep),
        regs.iter()
            .map(|r| label_for(r))
            .collect::<Vec<_>>()
            .join(", ")
    );
    let mut table = Table::new(
        id.as_str(),
        caption,
        vec!["Explanatory Variables".into(), "Coefficient".into()],
    );
    for r in &regs {
        table
            .rows
            .push(coef_row(&label_for(r), &col, r, "model", 2));
    }
    table.rows.push(stat_row(
        "Wald Chi Square",
        &[&col],
        "wald",
        wald,
        two,
        None,
    ));
    table.rows.push(stat_row(
        "No. of Cross Sections",
        &[&col],
        "n_units",
        |r| r.n_units as f64,
        int,
        None,
    ));
    table
        .notes
        .extend(SIGNIFICANCE_NOTES.iter().map(|s| s.to_string()));
    table.notes.extend(elasticity_note(panel, &col, &gvc));
    Ok(ModelOutput {
        id,
        columns: vec![col],
        table,
    })
}

fn split_model(
    panel: &PanelDataset,
    id: ModelId,
    side: Side,
    opts: &ModelOptions,
    sample: &Sample,
) -> Result<ModelOutput> {
    let gvc = side.gvc();
    let base = vec![
        gvc.clone(),
        log(vars::GDP),
        log(vars::MFG),
        log(vars::ESI),
        log(vars::TO),
    ];
    let interactions: Vec<String> = INTERACTED.iter().map(|c| inter(&gvc, &log(c))).collect();
    let mut all_regs = base.clone();
    all_regs.extend(interactions.iter().cloned());
    let dep = side.dependent();

    let (oecd, non): (Vec<String>, Vec<String>) = panel
        .units()
        .iter()
        .cloned()
        .partition(|u| sample.oecd.contains(u));
    let oecd_panel = panel.select_units(&oecd)?;
    let non_panel = panel.select_units(&non)?;
    let cols = [
        fgls_column(&oecd_panel, "oecd", "OECD", &dep, &base, opts, false)?,
        fgls_column(&non_panel, "non_oecd", "NON OECD", &dep, &base, opts, false)?,
        fgls_column(panel, "all", "ALL EME's", &dep, &all_regs, opts, false)?,
    ];
    let side_word = if side == Side::Domestic {
        "Forward"
    } else {
        "Backward"
    };
    let caption = format!("Results through emissions for {side_word} GVC Participation for OECD, NON-OECD and all EME's with country characteristics");
    let mut table = Table::new(
        id.as_str(),
        caption,
        vec![
            "Dep Variable:".into(),
            "OECD".into(),
            "NON OECD".into(),
            "ALL EME's".into(),
        ],
    );
    let dep_label = if side == Side::Domestic {
        "Domestic Emissions embodied in Gross Exports"
    } else {
        "Foreign Emissions embodied in Gross Exports"
    };
    table
        .rows
        .push(Row::new(dep_label, vec![String::new(); 3], ""));
    for r in &all_regs {
        let cells: Vec<(&ModelColumn, &str, &str)> = cols
            .iter()
            .map(|c| (c, r.as_str(), c.key.as_str()))
            .collect();
        table.rows.push(coef_rows(&label_for(r), &cells, 2, None));
    }
    let refs: Vec<&ModelColumn> = cols.iter().collect();
    table
        .rows
        .push(stat_row("Wald Chi Square", &refs, "wald", wald, two, None));
    table.rows.push(stat_row(
        "No. of Observations",
        &refs,
        "n",
        |r| r.n as f64,
        int,
        None,
    ));
    table.rows.push(stat_row(
        "No. of Cross-Sections",
        &refs,
        "n_units",
        |r| r.n_units as f64,
        int,
        None,
    ));
    table
        .notes
        .extend(SIGNIFICANCE_NOTES.iter().map(|s| s.to_string()));
    Ok(ModelOutput {
        id,
        columns: cols.to_vec(),
        table,
    })
}

fn side_by_side_header() -> Vec<String> {
    vec![
        "Dep Var: Domestic Emissions".into(),
        "Coefficient".into(),
        "Dep Var: Foreign Emissions".into(),
        "Coefficient".into(),
    ]
}

fn time_effects_model(panel: &PanelDataset, opts: &ModelOptions) -> Result<ModelOutput> {
    let sides = [Side::Domestic, Side::Foreign];
    let cols: Vec<ModelColumn> = sides
        .iter()
        .map(|s| {
            fgls_column(
                panel,
                s.key(),
                long_label(&s.dependent()),
                &s.dependent(),
                &s.fe_regressors(),
                opts,
                true,
            )
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new(
        ModelId::Table8.as_str(),
        "Panel Data Results with Fixed Time Effects",
        side_by_side_header(),
    );
    let (dom, forr) = (
        Side::Domestic.fe_regressors(),
        Side::Foreign.fe_regressors(),
    );
    for (d, f) in dom.iter().zip(&forr) {
        let between = [long_label(f)];
        table.rows.push(coef_rows(
            long_label(d),
            &[(&cols[0], d, "domestic"), (&cols[1], f, "foreign")],
            4,
            Some(&between),
        ));
    }
    let refs: Vec<&ModelColumn> = cols.iter().collect();
    let row = |label: &'static str| [label];
    table.rows.push(stat_row(
        "Wald Chi Square",
        &refs,
        "wald",
        wald,
        |v| fmt_fixed(v, 3),
        Some(&row("Wald Chi Square")),
    ));
    let mut fe = Row::new(
        "Fixed Time Effects",
        vec!["Yes".into(), "Fixed Time Effects".into(), "Yes".into()],
        refs.iter()
            .map(|c| c.source.clone())
            .collect::<Vec<_>>()
            .join(" | "),
    );
    for c in &cols {
        fe = fe.value(
            "time_effects",
            &c.key,
            if c.result.time_effects { 1.0 } else { 0.0 },
        );
    }
    table.rows.push(fe);
    table.rows.push(stat_row(
        "No. of Observations",
        &refs,
        "n",
        |r| r.n as f64,
        int,
        Some(&row("No. of Observations")),
    ));
    table.rows.push(stat_row(
        "No. of Cross sections",
        &refs,
        "n_units",
        |r| r.n_units as f64,
        int,
        Some(&row("No. of Cross sections")),
    ));
    table.rows.push(stat_row(
        "No of time periods",
        &refs,
        "n_periods",
        |r| r.n_periods as f64,
        int,
        Some(&row("No of time periods")),
    ));
    table
        .notes
        .extend(SIGNIFICANCE_NOTES.iter().map(|s| s.to_string()));
    Ok(ModelOutput {
        id: ModelId::Table8,
        columns: cols,
        table,
    })
}

fn dynamic_model(panel: &PanelDataset, opts: &ModelOptions) -> Result<ModelOutput> {
    let sides = [Side::Domestic, Side::Foreign];
    let mut cols = Vec::new();
    let mut specs = Vec::new();
    for s in sides {
        let regs = s.fe_regressors();
        let spec = AndersonHsiaoSpec::new(&s.dependent(), &regs)
            .instrumenting(&s.gvc())
            .instrument(opts.instrument);
        let result = anderson_hsiao(panel, &spec)?;
        let variant = match opts.instrument {
            crate::estimators::InstrumentVariant::LaggedDifference => "lagged-difference",
            crate::estimators::InstrumentVariant::LaggedLevel => "lagged-level",
        };
        cols.push(ModelColumn {
            key: s.key().into(),
            header: long_label(&s.dependent()).into(),
            units: panel.units().to_vec(),
            source: describe(
                "anderson_hsiao",
                &s.dependent(),
                &regs,
                &format!("; instrumenting {}; instrument={variant}", s.gvc()),
            ),
            result,
        });
        specs.push(spec);
    }
    let caption = "Results through emissions for GVC Participation using Dynamic Panel Model with Instrument Variable";
    let mut table = Table::new(ModelId::Table9.as_str(), caption, side_by_side_header());
    let header_row =
        |d: &str, f: &str| Row::new(d, vec![String::new(), f.to_string(), String::new()], "");

    let (dl, fl) = (specs[0].lagged_name(), specs[1].lagged_name());
    table.rows.push(header_row(
        long_label(&Side::Domestic.dependent()),
        long_label(&Side::Foreign.dependent()),
    ));
    table.rows.push(coef_rows(
        "Lagged",
        &[(&cols[0], &dl, "domestic"), (&cols[1], &fl, "foreign")],
        4,
        Some(&["Lagged"]),
    ));
    let (dom, forr) = (
        Side::Domestic.fe_regressors(),
        Side::Foreign.fe_regressors(),
    );
    for (d, f) in dom.iter().zip(&forr) {
        let (dn, fnm) = (
            AndersonHsiaoSpec::diff_name(d),
            AndersonHsiaoSpec::diff_name(f),
        );
        table.rows.push(header_row(long_label(d), long_label(f)));
        table.rows.push(coef_rows(
            "First Difference",
            &[(&cols[0], &dn, "domestic"), (&cols[1], &fnm, "foreign")],
            4,
            Some(&["First Difference"]),
        ));
    }
    table.rows.push(coef_rows(
        "Constant",
        &[
            (&cols[0], INTERCEPT, "domestic"),
            (&cols[1], INTERCEPT, "foreign"),
        ],
        4,
        Some(&["Constant"]),
    ));
    let refs: Vec<&ModelColumn> = cols.iter().collect();
    table.rows.push(stat_row(
        "Wald Chi Square",
        &refs,
        "wald",
        wald,
        two,
        Some(&[""]),
    ));
    table.rows.push(stat_row(
        "Overall R square",
        &refs,
        "r_squared",
        |r| r.r_squared,
        |v| fmt_fixed(v, 4),
        Some(&[""]),
    ));
    table.rows.push(stat_row(
        "No. of Observations",
        &refs,
        "n",
        |r| r.n as f64,
        int,
        Some(&[""]),
    ));
    table
        .notes
        .extend(SIGNIFICANCE_NOTES.iter().map(|s| s.to_string()));
    for c in &cols {
        for fs in &c.result.first_stage {
            table.notes.push(format!(
                "First-stage F for {} ({}): {}{}",
                fs.column,
                c.key,
                fmt_fixed(fs.f_stat, 2),
                if fs.weak { " (weak instrument)" } else { "" }
            ));
        }
    }
    Ok(ModelOutput {
        id: ModelId::Table9,
        columns: cols,
        table,
    })
}

/// Cross-sectional dependence of pooled OLS residuals for the two
/// specifications without squared terms.
pub fn cd_table(panel: &PanelDataset) -> Result<(Table, Vec<CdReport>)> {
    let mut table = Table::new(
        "cd_test",
        "Results from Cross-sectional Dependence",
        vec![
            "Model".into(),
            "Avg Absolute Correlation".into(),
            "Pesaran Statistic".into(),
        ],
    );
    let mut reports = Vec::new();
    for side in [Side::Domestic, Side::Foreign] {
        let regs = vec![
            side.gvc(),
            log(vars::TO),
            log(vars::MFG),
            log(vars::GDP),
            log(vars::ESI),
        ];
        let spec = RegressionSpec::new(&side.dependent(), &regs).scheme(CovarianceScheme::Iid);
        let fit = ols(panel, &spec)?;
        let cd = pesaran_cd_labeled(&fit.residual_rows(), Some(panel.units()))?;
        let short = match side {
            Side::Domestic => "Dom CO2",
            Side::Foreign => "For CO2",
        };
        let label = format!(
            "{short}= f({})",
            regs.iter()
                .map(|r| label_for(r))
                .collect::<Vec<_>>()
                .join(", ")
        );
        let row = Row::new(
            label,
            vec![
                format!(
                    "{} ({})",
                    fmt_fixed(cd.avg_abs_correlation, 3),
                    fmt_fixed(cd.p_value, 2)
                ),
                two(cd.statistic),
            ],
            format!(
                "pesaran_cd(residuals of {})",
                describe("ols", &side.dependent(), &regs, "")
            ),
        )
        .value(side.key(), "avg_abs_corr", cd.avg_abs_correlation)
        .value(side.key(), "p", cd.p_value)
        .value(side.key(), "cd", cd.statistic);
        table.rows.push(row);
        reports.push(cd);
    }
    table
        .notes
        .push("H0: cross-sections are not dependent; p-values in parentheses".into());
    Ok((table, reports))
}

const DESCRIPTIVE_ORDER: [(&str, &str); 11] = [
    (vars::FWD_GVC, "Forward GVC"),
    (vars::BWD_GVC, "Backward GVC"),
    (
        vars::DOM_CO2,
        "Domestic Emissions embodied in gross exports",
    ),
    (vars::FOR_CO2, "Foreign Emissions embodied in gross exports"),
    (vars::FOR_COVER, "Forest Cover"),
    (vars::TO, "Trade Openness"),
    (vars::POP_DENSITY, "Population Density"),
    (vars::ESI, "Stringency Index"),
    (vars::GDP, "GDP Per Capita"),
    (vars::MFG, "Manufacturing Share in GDP"),
    (vars::REN_ENERGY_CONS, "Renewable Energy Consumption"),
];

/// Rows shown when no variables are requested; renewable energy is opt-in.
const DEFAULT_DESCRIPTIVES: usize = 10;

/// Descriptive statistics of the logged variables, six decimals.
/// `only` restricts the rows to the named raw variables.
pub fn descriptive_table(panel: &PanelDataset, only: Option<&[String]>) -> Result<Table> {
    let names: Vec<(String, &str)> = DESCRIPTIVE_ORDER
        .iter()
        .enumerate()
        .filter(|(i, (v, _))| match only {
            Some(o) => o.iter().any(|x| x == v),
            None => *i < DEFAULT_DESCRIPTIVES,
        })
        .map(|(_, pair)| pair)
        .map(|(v, l)| (log(v), *l))
        .filter(|(v, _)| panel.contains(v))
        .collect();
    if names.is_empty() {
        return Err(DiagnosticsError::TooFewVariables.into());
    }
    let refs: Vec<&str> = names.iter().map(|(v, _)| v.as_str()).collect();
    let stats = descriptive_stats(panel, &refs)?;
    let mut table = Table::new(
        "descriptives",
        "Descriptive Statistics",
        ["Variable", "Obs", "Mean", "Std. Dev.", "Min", "Max"]
            .map(String::from)
            .to_vec(),
    );
    for (s, (_, label)) in stats.iter().zip(&names) {
        let cells = vec![
            s.obs.to_string(),
            fmt_fixed(s.mean, 6),
            fmt_fixed(s.std_dev, 6),
            fmt_fixed(s.min, 6),
            fmt_fixed(s.max, 6),
        ];
        table.rows.push(
            Row::new(*label, cells, format!("descriptive_stats({})", s.variable))
                .value(&s.variable, "obs", s.obs as f64)
                .value(&s.variable, "mean", s.mean)
                .value(&s.variable, "sd", s.std_dev)
                .value(&s.variable, "min", s.min)
                .value(&s.variable, "max", s.max),
        );
    }
    Ok(table)
}

fn corr_label(v: &str) -> &str {
    match v.strip_prefix(LOG_PREFIX).unwrap_or(v) {
        vars::MFG => "Manufacturing Value Added",
        other => long_label(other),
    }
}

/// Lower-triangular correlation matrices of the log GVC measure with the
/// controls, one per participation direction present in the panel.
pub fn correlation_tables(panel: &PanelDataset) -> Result<Vec<Table>> {
    let mut out = Vec::new();
    for (side, id) in [
        (Side::Domestic, "correlations_forward"),
        (Side::Foreign, "correlations_backward"),
    ] {
        if !panel.contains(&side.gvc()) {
            continue;
        }
        let vars_: Vec<String> = vec![
            side.gvc(),
            log(vars::MFG),
            log(vars::GDP),
            log(vars::ESI),
            log(vars::TO),
        ];
        let refs: Vec<&str> = vars_.iter().map(String::as_str).collect();
        out.push(correlation_table(panel, id, &refs)?);
    }
    Ok(out)
}

/// Lower-triangular correlation table over arbitrary panel variables.
pub fn correlation_table(panel: &PanelDataset, id: &str, variables: &[&str]) -> Result<Table> {
    let m = correlation_matrix(panel, variables)?;
    let mut columns = vec![String::new()];
    columns.extend(variables.iter().map(|v| corr_label(v).to_string()));
    let mut table = Table::new(id, "Correlation Matrix", columns);
    for (i, a) in variables.iter().enumerate() {
        let cells: Vec<String> = (0..variables.len())
            .map(|j| match j.cmp(&i) {
                std::cmp::Ordering::Less => fmt_fixed(m.values[(i, j)], 4),
                std::cmp::Ordering::Equal => "1".into(),
                std::cmp::Ordering::Greater => String::new(),
            })
            .collect();
        let mut row = Row::new(
            corr_label(a),
            cells,
            format!("correlation_matrix({})", variables.join(", ")),
        );
        for (j, b) in variables.iter().enumerate().take(i + 1) {
            row = row.value(a, b, m.values[(i, j)]);
        }
        table.rows.push(row);
    }
    table
        .notes
        .push(format!("Pooled over {} complete observations", m.obs));
    Ok(table)
}

/// English short names for the bundled sample; other codes print as-is.
pub fn country_name(code: &str) -> &str {
    match code {
        "BRA" => "Brazil",
        "CHN" => "China",
        "CZE" => "Czech Republic",
        "HUN" => "Hungary",
        "IDN" => "Indonesia",
        "IND" => "India",
        "ISR" => "Israel",
        "KOR" => "South Korea",
        "POL" => "Poland",
        "PRT" => "Portugal",
        "RUS" => "Russia",
        "SVN" => "Slovenia",
        "THA" => "Thailand",
        "TUR" => "Turkey",
        "VNM" => "Vietnam",
        "ZAF" => "South Africa",
        other => other,
    }
}

fn rank_inputs(
    panel: &PanelDataset,
    variable: &str,
    year: i32,
    basis: RankBasis,
) -> Result<Vec<RankInput>> {
    let t = panel
        .periods()
        .iter()
        .position(|&p| p == year)
        .ok_or_else(|| PanelError::Invalid(format!("year {year} is outside the panel")))?;
    let mut inputs = Vec::new();
    for (u, code) in panel.units().iter().enumerate() {
        let mut input = RankInput {
            country: code.clone(),
            value: panel.value(variable, u, t)?,
            gross_exports: None,
        };
        if basis == RankBasis::ShareOfGrossExports {
            input.gross_exports = panel.value(vars::GROSS_EXPORTS, u, t)?;
        }
        inputs.push(input);
    }
    Ok(inputs)
}

/// One indicator ranked for one year, rendered with country names.
pub fn single_rank_table(
    panel: &PanelDataset,
    variable: &str,
    year: i32,
    basis: RankBasis,
) -> Result<(RankTable, Table)> {
    let ranks = rank_table(
        variable,
        year,
        basis,
        &rank_inputs(panel, variable, year, basis)?,
    )?;
    let basis_word = match basis {
        RankBasis::Level => "level",
        RankBasis::ShareOfGrossExports => "share of gross exports",
    };
    let mut table = Table::new(
        &format!(
            "rank_{}_{year}_{}",
            variable.to_lowercase(),
            basis_word.split(' ').next().unwrap_or("level")
        ),
        format!(
            "Ranks from Highest to Lowest in {year}: {} ({basis_word})",
            raw_label(variable)
        ),
        vec!["Ranks".into(), "Country".into(), "Value".into()],
    );
    for r in &ranks.rows {
        table.rows.push(
            Row::new(
                r.rank.to_string(),
                vec![country_name(&r.country).into(), fmt_fixed(r.value, 6)],
                format!("rank_table({variable}, {year}, {})", basis_word),
            )
            .value(&r.rank.to_string(), "value", r.value),
        );
    }
    Ok((ranks, table))
}

/// The four-indicator rank table for one year: GVC participation on
/// `gvc_basis`, export-embodied emissions on `emission_basis`.
pub fn rank_report(
    panel: &PanelDataset,
    year: i32,
    gvc_basis: RankBasis,
    emission_basis: RankBasis,
) -> Result<Table> {
    let cols = [
        (vars::FWD_GVC, "Forward Participation", gvc_basis),
        (vars::BWD_GVC, "Backward Participation", gvc_basis),
        (
            vars::FOR_CO2,
            "Foreign Emissions embodied in Gross Exports",
            emission_basis,
        ),
        (
            vars::DOM_CO2,
            "Domestic Emissions embodied in Gross Exports",
            emission_basis,
        ),
    ];
    let mut ranked = Vec::new();
    for (v, _, basis) in cols {
        ranked.push(rank_table(
            v,
            year,
            basis,
            &rank_inputs(panel, v, year, basis)?,
        )?);
    }
    let mut columns = vec!["Ranks".to_string()];
    columns.extend(cols.iter().map(|c| c.1.to_string()));
    let mut table = Table::new(
        &format!("ranks_{year}"),
        format!("Ranks from Highest to Lowest in {year}"),
        columns,
    );
    for i in 0..panel.n_units() {
        let rank = (i + 1).to_string();
        let cells: Vec<String> = ranked
            .iter()
            .map(|r| country_name(&r.rows[i].country).to_string())
            .collect();
        let source = cols
            .iter()
            .map(|(v, _, b)| format!("rank_table({v}, {year}, {})", b.as_str()))
            .collect::<Vec<_>>()
            .join(" | ");
        let mut row = Row::new(&rank, cells, source);
        for ((v, _, _), r) in cols.iter().zip(&ranked) {
            row = row.value(&rank, v, r.rows[i].value);
        }
        table.rows.push(row);
    }
    table.notes.push(format!(
        "GVC participation ranked as {}; emissions ranked as {}. Rank 1 is the highest value.",
        basis_phrase(gvc_basis),
        basis_phrase(emission_basis)
    ));
    Ok(table)
}

fn basis_phrase(b: RankBasis) -> &'static str {
    match b {
        RankBasis::Level => "levels",
        RankBasis::ShareOfGrossExports => "a share of gross exports",
    }
}

/// Long-format logged GVC and emission series for scatter plots.
pub fn plot_data(panel: &PanelDataset) -> Result<String> {
    let cols: Vec<String> = [vars::FWD_GVC, vars::BWD_GVC, vars::DOM_CO2, vars::FOR_CO2]
        .iter()
        .map(|v| log(v))
        .filter(|v| panel.contains(v))
        .collect();
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header = vec!["country".to_string(), "year".to_string()];
    header.extend(cols.iter().cloned());
    w.write_record(&header).expect("in-memory write");
    for (u, code) in panel.units().iter().enumerate() {
        for (t, year) in panel.periods().iter().enumerate() {
            let mut rec = vec![code.clone(), year.to_string()];
            for c in &cols {
                rec.push(
                    panel
                        .value(c, u, t)?
                        .map(|v| format!("{v}"))
                        .unwrap_or_default(),
                );
            }
            w.write_record(&rec).expect("in-memory write");
        }
    }
    Ok(String::from_utf8(w.into_inner().expect("flushed")).expect("utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn bundled_panel() -> PanelDataset {
        let world = synth::bundled_world(synth::BUNDLED_SEED);
        let p = crate::report::Inputs::panel_from_world(&world).unwrap();
        prepare_panel(&p, LogBase::Ten, None).unwrap()
    }

    fn sample() -> Sample {
        Sample {
            countries: synth::SAMPLE.iter().map(|s| s.0.to_string()).collect(),
            oecd: synth::SAMPLE
                .iter()
                .filter(|s| s.1)
                .map(|s| s.0.to_string())
                .collect(),
        }
    }

    #[test]
    fn labels() {
        assert_eq!(label_for("log_FWD_GVC"), "Forward GVC");
        assert_eq!(label_for("log_BWD_GVC_sq"), "(Backward GVC)²");
        assert_eq!(
            label_for("log_FWD_GVC_x_log_FOR_COVER"),
            "Forward GVC*FOR COVER"
        );
        assert_eq!(label_for("log_ESI"), "STR");
        assert_eq!(label_for("D.log_TO"), "TO");
        assert_eq!(label_for("const"), "Constant");
    }

    #[test]
    fn model_ids_parse() {
        for m in ModelId::ALL {
            assert_eq!(m.as_str().parse::<ModelId>().unwrap(), m);
        }
        assert!("model3".parse::<ModelId>().is_err());
    }

    #[test]
    fn model1_cells_match_estimator_output() {
        let p = bundled_panel();
        let out = run_model(&p, ModelId::Model1, &ModelOptions::default(), &sample()).unwrap();
        let t = &out.table;
        assert_eq!(t.rows.len(), 8);
        assert_eq!(t.rows[6].label, "Wald Chi Square");
        assert_eq!(t.rows[7].cells, vec!["16".to_string()]);
        let direct = fgls_ar1(
            &p,
            &RegressionSpec::new(
                "log_DOM_CO2",
                &[
                    "log_FWD_GVC",
                    "log_FWD_GVC_sq",
                    "log_GDP",
                    "log_MFG",
                    "log_ESI",
                    "log_TO",
                ],
            ),
        )
        .unwrap();
        assert_eq!(t.lookup("log_TO", "model.coef"), direct.coef("log_TO"));
        assert_eq!(t.lookup("wald", "model"), Some(direct.wald.statistic));
    }

    #[test]
    fn table6_interactions_only_in_all_column() {
        let p = bundled_panel();
        let out = run_model(&p, ModelId::Table6, &ModelOptions::default(), &sample()).unwrap();
        let row = out.table.row("Forward GVC*FOR COVER").unwrap();
        assert_eq!(&row.cells[..2], &[String::new(), String::new()]);
        assert!(!row.cells[2].is_empty());
        assert_eq!(out.table.lookup("n_units", "oecd"), Some(8.0));
        assert_eq!(out.table.lookup("n", "all"), Some(384.0));
    }

    #[test]
    fn table8_footer() {
        let p = bundled_panel();
        let out = run_model(&p, ModelId::Table8, &ModelOptions::default(), &sample()).unwrap();
        let last = out.table.rows.last().unwrap();
        assert_eq!(last.label, "No of time periods");
        assert_eq!(
            last.cells,
            vec!["24".to_string(), "No of time periods".into(), "24".into()]
        );
    }

    #[test]
    fn cd_rows() {
        let (t, r) = cd_table(&bundled_panel()).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(
            t.rows[0].label,
            "Dom CO2= f(Forward GVC, TO, MFG, GDP, STR)"
        );
        assert_eq!(t.lookup("domestic", "cd"), Some(r[0].statistic));
    }

    #[test]
    fn descriptives_have_384_obs() {
        let t = descriptive_table(&bundled_panel(), None).unwrap();
        assert_eq!(t.rows[0].label, "Forward GVC");
        assert!(t.rows.iter().all(|r| r.cells[0] == "384"));
        let one = descriptive_table(&bundled_panel(), Some(&["TO".to_string()])).unwrap();
        assert_eq!(one.rows.len(), 1);
    }
}
