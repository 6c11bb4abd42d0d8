//! Run configuration (TOML).
//!
//! ```toml
//! [data]
//! icio = "icio/icio_{year}.csv"
//! emissions = "emissions/emissions_{year}.csv"
//! indicators = "indicators.csv"
//! first_year = 1995
//! last_year = 2018
//!
//! [sample]
//! countries = ["CHN", "IND"]
//! oecd = []
//!
//! [model]
//! log_base = "10"
//! fgls_scheme = "ar1+panel-heteroscedastic"
//! instrument = "lagged-difference"
//!
//! [output]
//! dir = "out"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{read_to_string, IngestError, Result};
use crate::estimators::{CovarianceScheme, InstrumentVariant};
use crate::panel::LogBase;

/// Environment variable naming the default data directory.
pub const DATA_DIR_ENV: &str = "GVC_DATA_DIR";

/// ISIC Rev.4 section C codes as used in ICIO releases (both aggregation
/// levels, so either edition matches).
pub const DEFAULT_MANUFACTURING: &[&str] = &[
    "C", "D10T33", "D10T12", "D13T15", "D16", "D17T18", "D19", "D20", "D20T21", "D21", "D22",
    "D23", "D24", "D25", "D26", "D27", "D28", "D29", "D30", "D31T33",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataPaths,
    pub sample: Sample,
    #[serde(default)]
    pub model: ModelOptions,
    #[serde(default)]
    pub output: OutputOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPaths {
    /// ICIO file pattern; `{year}` is substituted.
    pub icio: Option<String>,
    /// Emissions file pattern; `{year}` is substituted.
    pub emissions: Option<String>,
    pub indicators: Option<String>,
    /// A pre-assembled wide panel; replaces the ICIO + indicator route.
    pub panel: Option<String>,
    pub first_year: i32,
    pub last_year: i32,
    #[serde(default)]
    pub pass_through_variables: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sample {
    pub countries: Vec<String>,
    #[serde(default)]
    pub oecd: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelOptions {
    pub manufacturing: Vec<String>,
    pub log_base: LogBase,
    pub fgls_scheme: CovarianceScheme,
    pub per_unit_rho: bool,
    pub instrument: InstrumentVariant,
    /// Additive shift applied to the stringency index before taking logs.
    pub esi_log_shift: Option<f64>,
    pub vintage: Option<String>,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self {
            manufacturing: DEFAULT_MANUFACTURING
                .iter()
                .map(|s| s.to_string())
                .collect(),
            log_base: LogBase::Ten,
            fgls_scheme: CovarianceScheme::Ar1PanelHeteroscedastic,
            per_unit_rho: false,
            instrument: InstrumentVariant::LaggedDifference,
            esi_log_shift: None,
            vintage: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputOptions {
    pub dir: String,
}

impl Default for OutputOptions {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| IngestError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(IngestError::Config(m));
        if self.data.first_year > self.data.last_year {
            return err(format!(
                "first_year {} after last_year {}",
                self.data.first_year, self.data.last_year
            ));
        }
        if self.sample.countries.is_empty() {
            return err("sample.countries is empty".into());
        }
        let mut seen = std::collections::HashSet::new();
        for c in &self.sample.countries {
            if !seen.insert(c) {
                return err(format!("country `{c}` listed twice in the sample"));
            }
        }
        let mut seen_oecd = std::collections::HashSet::new();
        for c in &self.sample.oecd {
            if !self.sample.countries.contains(c) {
                return err(format!("OECD member `{c}` is not in the sample"));
            }
            if !seen_oecd.insert(c) {
                return err(format!("country `{c}` listed twice in sample.oecd"));
            }
        }
        if self.data.panel.is_none() && self.data.indicators.is_none() && self.data.icio.is_none() {
            return err(
                "no input: set data.panel, or data.icio/data.emissions/data.indicators".into(),
            );
        }
        if self.data.icio.is_some() != self.data.emissions.is_some() {
            return err("data.icio and data.emissions must be given together".into());
        }
        if let Some(shift) = self.model.esi_log_shift {
            if !shift.is_finite() {
                return err("model.esi_log_shift must be finite".into());
            }
        }
        Ok(())
    }

    pub fn years(&self) -> Vec<i32> {
        (self.data.first_year..=self.data.last_year).collect()
    }

    pub fn oecd_members(&self) -> Vec<String> {
        self.sample
            .countries
            .iter()
            .filter(|c| self.sample.oecd.contains(c))
            .cloned()
            .collect()
    }

    pub fn non_oecd_members(&self) -> Vec<String> {
        self.sample
            .countries
            .iter()
            .filter(|c| !self.sample.oecd.contains(c))
            .cloned()
            .collect()
    }

    /// Substitutes `{year}` in a path pattern and resolves it against `base`.
    pub fn resolve(base: &Path, pattern: &str, year: Option<i32>) -> PathBuf {
        let p = match year {
            Some(y) => pattern.replace("{year}", &y.to_string()),
            None => pattern.to_string(),
        };
        let p = PathBuf::from(p);
        if p.is_absolute() {
            p
        } else {
            base.join(p)
        }
    }

    /// Canonical TOML rendering; identical configs hash identically.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIN: &str = r#"
[data]
indicators = "ind.csv"
first_year = 2000
last_year = 2003

[sample]
countries = ["AAA", "BBB", "CCC"]
oecd = ["BBB"]
"#;

    #[test]
    fn defaults_and_partition() {
        let c = RunConfig::parse(MIN).unwrap();
        assert_eq!(c.model.log_base, LogBase::Ten);
        assert_eq!(c.model.instrument, InstrumentVariant::LaggedDifference);
        assert_eq!(c.years(), vec![2000, 2001, 2002, 2003]);
        assert_eq!(c.oecd_members(), vec!["BBB".to_string()]);
        assert_eq!(
            c.non_oecd_members(),
            vec!["AAA".to_string(), "CCC".to_string()]
        );
    }

    #[test]
    fn hash_is_deterministic() {
        let a = RunConfig::parse(MIN).unwrap();
        let b = RunConfig::parse(&MIN.replace("\n\n", "\n\n\n")).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig::parse(&MIN.replace("2003", "2004")).unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(RunConfig::parse(&MIN.replace("oecd = [\"BBB\"]", "oecd = [\"ZZZ\"]")).is_err());
        assert!(RunConfig::parse(&MIN.replace("last_year = 2003", "last_year = 1990")).is_err());
        assert!(RunConfig::parse(&MIN.replace("[sample]", "[sample]\nbogus = 1")).is_err());
        assert!(RunConfig::parse(
            &MIN.replace("indicators = \"ind.csv\"", "icio = \"i_{year}.csv\"")
        )
        .is_err());
    }

    #[test]
    fn model_options_parse() {
        let text = format!("{MIN}\n[model]\nlog_base = \"e\"\nfgls_scheme = \"iid\"\ninstrument = \"lagged-level\"\n");
        let c = RunConfig::parse(&text).unwrap();
        assert_eq!(c.model.log_base, LogBase::Natural);
        assert_eq!(c.model.fgls_scheme, CovarianceScheme::Iid);
        assert_eq!(c.model.instrument, InstrumentVariant::LaggedLevel);
    }

    #[test]
    fn resolve_pattern() {
        let p = RunConfig::resolve(Path::new("/data"), "icio/icio_{year}.csv", Some(1995));
        assert_eq!(p, PathBuf::from("/data/icio/icio_1995.csv"));
    }
}
