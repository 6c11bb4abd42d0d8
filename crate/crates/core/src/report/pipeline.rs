use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::{
    cd_table, correlation_tables, descriptive_table, plot_data, prepare_panel, rank_report,
    run_model, BundleProvenance, ModelId, ReportBundle,
};
use crate::diagnostics::RankBasis;
use crate::ingest::{
    load_icio, load_indicator_panel, load_panel, IngestError, RunConfig, VariableNames,
};
use crate::mrio::{
    build_coefficients, conservation_check, ConservationCheck, EmbodiedAccounts, EmissionIntensity,
    IcioTable,
};
use crate::panel::{assemble_panel, LogBase, PanelDataset};
use crate::synth::BundledWorld;
use crate::Error;

type Result<T> = std::result::Result<T, Error>;

/// Export accounts for one ICIO year.
#[derive(Debug, Clone, PartialEq)]
pub struct YearAccounts {
    pub year: i32,
    pub accounts: EmbodiedAccounts,
    pub check: ConservationCheck,
    pub source: PathBuf,
}

/// A validated run configuration with the directory its relative paths
/// resolve against.
#[derive(Debug, Clone, PartialEq)]
pub struct Inputs {
    pub config: RunConfig,
    pub base: PathBuf,
}

fn accounts_for(
    icio: &IcioTable,
    emissions: &nalgebra::DVector<f64>,
) -> Result<(EmbodiedAccounts, ConservationCheck)> {
    let intensity = EmissionIntensity::from_emissions(emissions, icio.output())?;
    let model = build_coefficients(icio)?.leontief_inverse()?;
    let accounts = EmbodiedAccounts::compute(icio, &model, &intensity)?;
    let check = conservation_check(icio, &model, &intensity)?;
    Ok((accounts, check))
}

impl Inputs {
    pub fn new(config: RunConfig, base: impl Into<PathBuf>) -> Self {
        Self {
            config,
            base: base.into(),
        }
    }

    /// Reads `config_path`; relative data paths resolve against `data_dir`
    /// when given, else the config file's directory.
    pub fn load(config_path: &Path, data_dir: Option<&Path>) -> Result<Self> {
        let config = RunConfig::load(config_path)?;
        let base = match data_dir {
            Some(d) => d.to_path_buf(),
            None => config_path
                .parent()
                .map(Path::to_path_buf)
                .unwrap_or_default(),
        };
        Ok(Self::new(config, base))
    }

    pub fn with_log_base(mut self, base: LogBase) -> Self {
        self.config.model.log_base = base;
        self
    }

    fn resolve(&self, pattern: &str, year: Option<i32>) -> PathBuf {
        RunConfig::resolve(&self.base, pattern, year)
    }

    /// Every file the run reads, in a fixed order.
    pub fn input_paths(&self) -> Vec<PathBuf> {
        let d = &self.config.data;
        let mut out = Vec::new();
        if let Some(p) = &d.panel {
            out.push(self.resolve(p, None));
            return out;
        }
        if let (Some(icio), Some(em)) = (&d.icio, &d.emissions) {
            for y in self.config.years() {
                out.push(self.resolve(icio, Some(y)));
                out.push(self.resolve(em, Some(y)));
            }
        }
        if let Some(ind) = &d.indicators {
            out.push(self.resolve(ind, None));
        }
        out
    }

    fn load_year(&self, year: i32) -> Result<YearAccounts> {
        let (icio_pat, em_pat) = match (&self.config.data.icio, &self.config.data.emissions) {
            (Some(i), Some(e)) => (i, e),
            _ => {
                return Err(
                    IngestError::Config("data.icio and data.emissions are required".into()).into(),
                )
            }
        };
        let icio_path = self.resolve(icio_pat, Some(year));
        let icio = load_icio(&icio_path)?;
        if let Some(want) = &self.config.model.vintage {
            if icio.vintage() != Some(want.as_str()) {
                return Err(IngestError::Config(format!(
                    "{} has vintage {:?}, config requires `{want}`",
                    icio_path.display(),
                    icio.vintage()
                ))
                .into());
            }
        }
        if let Some(y) = icio.year() {
            if y != year {
                return Err(IngestError::Config(format!(
                    "{} declares year {y}, expected {year}",
                    icio_path.display()
                ))
                .into());
            }
        }
        let em_path = self.resolve(em_pat, Some(year));
        let text = std::fs::read_to_string(&em_path).map_err(|source| IngestError::Io {
            path: em_path.clone(),
            source,
        })?;
        let emissions =
            crate::ingest::parse_emissions(&text, &icio).map_err(|e| e.in_file(&em_path))?;
        let (accounts, check) = accounts_for(&icio, &emissions).map_err(|e| match e {
            Error::Mrio(m) => Error::Ingest(IngestError::Table(m).in_file(&icio_path)),
            other => other,
        })?;
        Ok(YearAccounts {
            year,
            accounts,
            check,
            source: icio_path,
        })
    }

    /// Export accounts for every configured year. Years are computed on
    /// scoped threads and collected by index, so the result does not depend
    /// on scheduling.
    pub fn accounts(&self) -> Result<Vec<YearAccounts>> {
        let years = self.config.years();
        let workers = std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
            .min(years.len())
            .max(1);
        let mut slots: Vec<Option<Result<YearAccounts>>> = (0..years.len()).map(|_| None).collect();
        std::thread::scope(|s| {
            for (w, chunk) in slots.chunks_mut(years.len().div_ceil(workers)).enumerate() {
                let years = &years;
                let start = w * years.len().div_ceil(workers);
                s.spawn(move || {
                    for (i, slot) in chunk.iter_mut().enumerate() {
                        *slot = Some(self.load_year(years[start + i]));
                    }
                });
            }
        });
        slots
            .into_iter()
            .map(|s| s.expect("every slot filled"))
            .collect()
    }

    /// The level panel: either the configured wide panel, or ICIO accounts
    /// joined with the indicator series.
    pub fn level_panel(&self) -> Result<PanelDataset> {
        let d = &self.config.data;
        let units = &self.config.sample.countries;
        if let Some(p) = &d.panel {
            let panel = load_panel(&self.resolve(p, None))?;
            return Ok(panel.select_units(units)?);
        }
        let names = if d.pass_through_variables {
            VariableNames::PassThrough
        } else {
            VariableNames::Strict
        };
        let indicators = match &d.indicators {
            Some(p) => load_indicator_panel(&self.resolve(p, None), names)?,
            None => Default::default(),
        };
        let accounts: BTreeMap<i32, EmbodiedAccounts> = if d.icio.is_some() {
            self.accounts()?
                .into_iter()
                .map(|y| (y.year, y.accounts))
                .collect()
        } else {
            BTreeMap::new()
        };
        Ok(assemble_panel(
            &accounts,
            &indicators,
            units,
            &self.config.years(),
            &self.config.model.manufacturing,
        )?)
    }

    /// Level panel plus logs, squares and interactions.
    pub fn prepared_panel(&self) -> Result<PanelDataset> {
        let m = &self.config.model;
        Ok(prepare_panel(
            &self.level_panel()?,
            m.log_base,
            m.esi_log_shift,
        )?)
    }

    /// Level panel for the bundled world computed in memory, without files.
    pub fn panel_from_world(world: &BundledWorld) -> Result<PanelDataset> {
        let mut accounts = BTreeMap::new();
        for y in &world.years {
            let (a, _) = accounts_for(&y.icio, &y.emissions)?;
            accounts.insert(y.icio.year().expect("bundled years are set"), a);
        }
        let units: Vec<String> = crate::synth::SAMPLE
            .iter()
            .map(|s| s.0.to_string())
            .collect();
        let periods: Vec<i32> = accounts.keys().copied().collect();
        let mfg: Vec<String> = crate::ingest::DEFAULT_MANUFACTURING
            .iter()
            .map(|s| s.to_string())
            .collect();
        Ok(assemble_panel(
            &accounts,
            &world.indicators,
            &units,
            &periods,
            &mfg,
        )?)
    }

    pub fn provenance(&self) -> BundleProvenance {
        let generated_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        BundleProvenance {
            inputs: self
                .input_paths()
                .iter()
                .map(|p| p.display().to_string())
                .collect(),
            config_hash: self.config.hash(),
            vintages: self.config.model.vintage.iter().cloned().collect(),
            generated_unix,
        }
    }

    /// Every table: cross-sectional dependence, first- and last-year ranks,
    /// the six regression tables, descriptive statistics and correlations,
    /// plus the plot-data attachment.
    pub fn report(&self) -> Result<ReportBundle> {
        let level = self.level_panel()?;
        let m = &self.config.model;
        let panel = prepare_panel(&level, m.log_base, m.esi_log_shift)?;
        let mut tables = Vec::new();
        tables.push(cd_table(&panel)?.0);
        let periods = level.periods();
        for year in [periods[0], periods[periods.len() - 1]] {
            tables.push(rank_report(
                &level,
                year,
                RankBasis::ShareOfGrossExports,
                RankBasis::Level,
            )?);
        }
        for id in ModelId::ALL {
            tables.push(run_model(&panel, id, m, &self.config.sample)?.table);
        }
        tables.push(descriptive_table(&panel, None)?);
        tables.extend(correlation_tables(&panel)?);
        Ok(ReportBundle {
            tables,
            provenance: self.provenance(),
            attachments: vec![("plot_data.csv".into(), plot_data(&panel)?)],
        })
    }
}
