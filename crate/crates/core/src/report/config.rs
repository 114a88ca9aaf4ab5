use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::binning::GroupingSpec;
use crate::checks::CheckThresholds;
use crate::error::{Error, Result};
use crate::exclusions::ExclusionSpec;
use crate::ingest::{default_missing_tokens, ColumnHint, LoadOptions};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
    Csv,
    Svg,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "svg" => Ok(OutputFormat::Svg),
            other => Err(Error::Config(format!("unknown format `{other}`"))),
        }
    }
}

/// Report sections selectable for text output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Section {
    #[serde(rename = "ident")]
    Ident,
    #[serde(rename = "attrib")]
    Attrib,
    #[serde(rename = "allCAPs")]
    AllCaps,
    #[serde(rename = "check_1way")]
    Check1Way,
    #[serde(rename = "check_2way")]
    Check2Way,
}

impl std::str::FromStr for Section {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ident" => Ok(Section::Ident),
            "attrib" => Ok(Section::Attrib),
            "allCAPs" | "allcaps" => Ok(Section::AllCaps),
            "check_1way" => Ok(Section::Check1Way),
            "check_2way" => Ok(Section::Check2Way),
            other => Err(Error::Config(format!("unknown report section `{other}`"))),
        }
    }
}

/// Everything a run needs. Serialized as one flat JSON object; command-line
/// flags override values read from a file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub orig: Option<PathBuf>,
    pub syn: Vec<PathBuf>,
    pub keys: Vec<String>,
    /// Empty means every synthetic column that is not a key.
    pub targets: Vec<String>,
    #[serde(flatten)]
    pub grouping: GroupingSpec,
    #[serde(flatten)]
    pub exclusions: ExclusionSpec,
    #[serde(flatten)]
    pub thresholds: CheckThresholds,
    pub na_codes: BTreeMap<String, Vec<f64>>,
    pub missing_tokens: Vec<String>,
    pub delimiter: char,
    pub format: OutputFormat,
    pub to_print: Vec<Section>,
    pub seed: u64,
    /// Thresholds for the generalized (tau) disclosure measure.
    pub taus: Vec<f64>,
    /// Synthetic size fractions for `sweep`.
    pub fractions: Vec<f64>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            orig: None,
            syn: Vec::new(),
            keys: Vec::new(),
            targets: Vec::new(),
            grouping: GroupingSpec::default(),
            exclusions: ExclusionSpec::default(),
            thresholds: CheckThresholds::default(),
            na_codes: BTreeMap::new(),
            missing_tokens: Vec::new(),
            delimiter: ',',
            format: OutputFormat::Text,
            to_print: Vec::new(),
            seed: 0,
            taus: Vec::new(),
            fractions: Vec::new(),
            out: None,
        }
    }
}

pub const DEFAULT_FRACTIONS: [f64; 6] = [0.05, 0.1, 0.25, 0.5, 0.75, 1.0];

impl RunConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn load_options(&self) -> Result<LoadOptions> {
        if !self.delimiter.is_ascii() {
            return Err(Error::Config(format!(
                "delimiter `{}` is not a single byte",
                self.delimiter
            )));
        }
        Ok(LoadOptions {
            delimiter: self.delimiter as u8,
            missing_tokens: if self.missing_tokens.is_empty() {
                default_missing_tokens()
            } else {
                self.missing_tokens.clone()
            },
            hints: self
                .na_codes
                .iter()
                .map(|(name, codes)| ColumnHint {
                    name: name.clone(),
                    kind: None,
                    na_codes: codes.clone(),
                })
                .collect(),
        })
    }

    pub fn sections(&self) -> Vec<Section> {
        if self.to_print.is_empty() {
            vec![Section::Ident, Section::Attrib]
        } else {
            self.to_print.clone()
        }
    }

    /// Checks everything that can be checked without reading data.
    pub fn validate(&self) -> Result<()> {
        if self.orig.is_none() {
            return Err(Error::Config("no original data file given".into()));
        }
        if self.syn.is_empty() {
            return Err(Error::Config("no synthetic data file given".into()));
        }
        self.validate_variables()?;
        for &tau in &self.taus {
            if !(0.0..=1.0).contains(&tau) {
                return Err(Error::Config(format!("tau must lie in [0, 1], got {tau}")));
            }
        }
        for &f in &self.fractions {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::Config(format!("fraction must lie in (0, 1], got {f}")));
            }
        }
        Ok(())
    }

    pub(crate) fn validate_variables(&self) -> Result<()> {
        if self.keys.is_empty() {
            return Err(Error::Config("at least one key is required".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for k in &self.keys {
            if !seen.insert(k) {
                return Err(Error::Config(format!("key `{k}` given twice")));
            }
        }
        if let Some(t) = self.targets.iter().find(|t| self.keys.contains(t)) {
            return Err(Error::Config(format!("target `{t}` is also a key")));
        }
        self.thresholds.validate()?;
        self.exclusions.validate(self.keys.len())
    }
}
