use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gvc_carbon::diagnostics::RankBasis;
use gvc_carbon::ingest::{render_accounts, render_panel, write_atomic, IngestError, DATA_DIR_ENV};
use gvc_carbon::panel::{validate_balanced, vars, LogBase, PanelDataset};
use gvc_carbon::report::{
    cd_table, check_tables, correlation_table, correlation_tables, country_name, descriptive_table,
    parse_expectations, rank_report, run_model, single_rank_table, Inputs, ModelId, Row, Table,
    LOG_PREFIX,
};

#[derive(Debug, Parser)]
#[command(
    name = "gvc",
    version,
    about = "Embodied carbon in trade, GVC participation and the panel regressions around them"
)]
struct Cli {
    /// Run configuration (TOML). Defaults to `<data-dir>/config.toml`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory that relative data paths resolve against.
    #[arg(long, global = true, env = DATA_DIR_ENV)]
    data_dir: Option<PathBuf>,
    /// Write outputs here as well as printing them.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides `model.log_base`: `10` or `e`.
    #[arg(long, global = true)]
    log_base: Option<LogBase>,
    /// Expectation CSV to compare the produced tables against.
    #[arg(long, global = true)]
    check: Option<PathBuf>,
    /// Rendering printed to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-year export accounts (emissions and GVC participation by industry).
    Embodied,
    /// GVC participation of the sample's manufacturing exports by country and year.
    Gvc {
        #[arg(long)]
        year: Option<i32>,
    },
    /// Assemble the country x year panel with its log transforms.
    BuildPanel,
    /// Estimate one regression table.
    Regress {
        /// model1, model2, table6, table7, table8 or table9
        model: ModelId,
    },
    /// Pesaran cross-sectional dependence of the two baseline models.
    CdTest,
    /// Descriptive statistics of the logged variables.
    Stats {
        /// Raw variable codes to include (default: all present).
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
    },
    /// Correlation matrices.
    Corr {
        /// Raw variable codes; defaults to the two GVC-plus-controls sets.
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
    },
    /// Country ranks for one indicator, or the four-indicator table.
    Rank {
        /// FWD_GVC, BWD_GVC, DOM_CO2, FOR_CO2 or any panel variable.
        #[arg(long)]
        indicator: Option<String>,
        /// Defaults to the first and last sample years.
        #[arg(long)]
        year: Option<i32>,
        /// Basis for `--indicator`: level or share.
        #[arg(long, default_value = "level")]
        basis: RankBasis,
        #[arg(long, default_value = "share")]
        gvc_basis: RankBasis,
        #[arg(long, default_value = "level")]
        emission_basis: RankBasis,
    },
    /// Every table plus plot data, written to `--out` (or the configured output directory).
    Report,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Lib(#[from] gvc_carbon::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0} expectation(s) failed")]
    CheckFailed(usize),
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Lib(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) if e.is_numerical() => 3,
            CliError::Lib(_) | CliError::Usage(_) => 2,
            CliError::CheckFailed(_) => 4,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

macro_rules! sayln {
    () => { say("\n") };
    ($($arg:tt)*) => { say(&format!("{}\n", format_args!($($arg)*))) };
}

/// Writes to stdout; a closed pipe (`gvc ... | head`) ends the process quietly.
fn say(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: writing to stdout: {e}");
        std::process::exit(2);
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn inputs(cli: &Cli) -> Result<Inputs> {
    let config = match (&cli.config, &cli.data_dir) {
        (Some(c), _) => c.clone(),
        (None, Some(d)) => d.join("config.toml"),
        (None, None) => {
            return Err(CliError::Usage(format!(
                "no configuration: pass --config or set --data-dir / {DATA_DIR_ENV}"
            )))
        }
    };
    let mut inputs = Inputs::load(&config, cli.data_dir.as_deref())?;
    if let Some(b) = cli.log_base {
        inputs = inputs.with_log_base(b);
    }
    Ok(inputs)
}

fn out_dir(cli: &Cli, inputs: &Inputs) -> PathBuf {
    cli.out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&inputs.config.output.dir))
}

fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Text => table.to_text(),
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    }
}

/// Prints the tables, writes them under `--out`, then applies `--check`.
fn emit(cli: &Cli, tables: &[Table]) -> Result<()> {
    for (i, t) in tables.iter().enumerate() {
        if i > 0 && cli.format == Format::Text {
            sayln!();
        }
        say(&render(t, cli.format));
        if let Some(dir) = &cli.out {
            write_table(dir, t)?;
        }
    }
    check(cli, tables)
}

fn write_table(dir: &Path, t: &Table) -> Result<()> {
    write_atomic(&dir.join(format!("{}.txt", t.id)), &t.to_text())?;
    write_atomic(&dir.join(format!("{}.csv", t.id)), &t.to_csv())?;
    write_atomic(&dir.join(format!("{}.json", t.id)), &t.to_json())?;
    Ok(())
}

fn check(cli: &Cli, tables: &[Table]) -> Result<()> {
    let Some(path) = &cli.check else {
        return Ok(());
    };
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.clone(),
        source,
    })?;
    let expectations = parse_expectations(&text).map_err(|e| e.in_file(path))?;
    let report = check_tables(tables, &expectations);
    eprint!("{}", report.summary());
    match report.failures().count() {
        0 => Ok(()),
        n => Err(CliError::CheckFailed(n)),
    }
}

fn run(cli: &Cli) -> Result<()> {
    let inputs = inputs(cli)?;
    match &cli.command {
        Command::Embodied => embodied(cli, &inputs),
        Command::Gvc { year } => emit(cli, &[gvc_table(&inputs.level_panel()?, *year)?]),
        Command::BuildPanel => build_panel(cli, &inputs),
        Command::Regress { model } => {
            let panel = inputs.prepared_panel()?;
            let out = run_model(&panel, *model, &inputs.config.model, &inputs.config.sample)?;
            emit(cli, &[out.table])
        }
        Command::CdTest => emit(cli, &[cd_table(&inputs.prepared_panel()?)?.0]),
        Command::Stats { vars } => {
            let only = (!vars.is_empty()).then_some(vars.as_slice());
            emit(cli, &[descriptive_table(&inputs.prepared_panel()?, only)?])
        }
        Command::Corr { vars } => {
            let panel = inputs.prepared_panel()?;
            let tables = if vars.is_empty() {
                correlation_tables(&panel)?
            } else {
                let names: Vec<String> = vars.iter().map(|v| format!("{LOG_PREFIX}{v}")).collect();
                let refs: Vec<&str> = names.iter().map(String::as_str).collect();
                vec![correlation_table(&panel, "correlations", &refs)?]
            };
            emit(cli, &tables)
        }
        Command::Rank {
            indicator,
            year,
            basis,
            gvc_basis,
            emission_basis,
        } => {
            let panel = inputs.level_panel()?;
            let periods = panel.periods();
            let years = match year {
                Some(y) => vec![*y],
                None => vec![periods[0], periods[periods.len() - 1]],
            };
            let mut tables = Vec::new();
            for y in years {
                tables.push(match indicator {
                    Some(v) => single_rank_table(&panel, v, y, *basis)?.1,
                    None => rank_report(&panel, y, *gvc_basis, *emission_basis)?,
                });
            }
            emit(cli, &tables)
        }
        Command::Report => {
            let bundle = inputs.report()?;
            let dir = out_dir(cli, &inputs);
            let written = bundle.write(&dir)?;
            sayln!("wrote {} files to {}", written.len(), dir.display());
            sayln!("content hash {}", bundle.content_hash());
            check(cli, &bundle.tables)
        }
    }
}

fn embodied(cli: &Cli, inputs: &Inputs) -> Result<()> {
    let years = inputs.accounts()?;
    let dir = out_dir(cli, inputs).join("embodied");
    sayln!("year  production_co2  consumption_co2  relative_gap  domestic_co2_exports  foreign_co2_exports");
    for y in &years {
        let path = dir.join(format!("embodied_{}.csv", y.year));
        write_atomic(&path, &render_accounts(&y.accounts, &y.check))?;
        let (mut dom, mut fore) = (0.0, 0.0);
        for c in y.accounts.countries.keys() {
            let t = y.accounts.country_total(c).expect("listed country");
            dom += t.domestic_co2;
            fore += t.foreign_co2;
        }
        sayln!(
            "{}  {:.6e}  {:.6e}  {:.3e}  {:.6e}  {:.6e}",
            y.year,
            y.check.production_total,
            y.check.consumption_total,
            y.check.relative_gap(),
            dom,
            fore
        );
    }
    sayln!("wrote {} files to {}", years.len(), dir.display());
    Ok(())
}

fn gvc_table(panel: &PanelDataset, year: Option<i32>) -> Result<Table> {
    let cols = [vars::GROSS_EXPORTS, vars::FWD_GVC, vars::BWD_GVC];
    let mut table = Table::new(
        "gvc_participation",
        "GVC participation of manufacturing exports",
        [
            "Country",
            "Year",
            "Gross Exports",
            "Forward GVC",
            "Backward GVC",
            "Forward share",
            "Backward share",
        ]
        .map(String::from)
        .to_vec(),
    );
    for (u, code) in panel.units().iter().enumerate() {
        for (t, &p) in panel.periods().iter().enumerate() {
            if year.is_some_and(|y| y != p) {
                continue;
            }
            let mut v = [0.0; 3];
            for (slot, name) in v.iter_mut().zip(cols) {
                *slot = panel
                    .value(name, u, t)
                    .map_err(gvc_carbon::Error::from)?
                    .ok_or_else(|| CliError::Usage(format!("{name} missing for ({code}, {p})")))?;
            }
            let share = |x: f64| if v[0] > 0.0 { x / v[0] } else { f64::NAN };
            let key = format!("{code}:{p}");
            let row = Row::new(
                country_name(code),
                vec![
                    p.to_string(),
                    format!("{:.2}", v[0]),
                    format!("{:.2}", v[1]),
                    format!("{:.2}", v[2]),
                    format!("{:.4}", share(v[1])),
                    format!("{:.4}", share(v[2])),
                ],
                "EmbodiedAccounts::aggregate(manufacturing)",
            )
            .value(&key, vars::GROSS_EXPORTS, v[0])
            .value(&key, vars::FWD_GVC, v[1])
            .value(&key, vars::BWD_GVC, v[2]);
            table.rows.push(row);
        }
    }
    Ok(table)
}

fn build_panel(cli: &Cli, inputs: &Inputs) -> Result<()> {
    let panel = inputs.prepared_panel()?;
    let required: Vec<&str> = panel.variable_names().collect();
    let report = validate_balanced(&panel, &required);
    let dir = out_dir(cli, inputs);
    let path = dir.join("panel.csv");
    write_atomic(&path, &render_panel(&panel))?;
    sayln!(
        "{} units x {} periods, {} variables, balanced: {}",
        panel.n_units(),
        panel.n_periods(),
        required.len(),
        if report.is_balanced() { "yes" } else { "no" }
    );
    for (var, unit, period) in report.holes() {
        sayln!("hole: {var} ({unit}, {period})");
    }
    sayln!("wrote {}", path.display());
    Ok(())
}
