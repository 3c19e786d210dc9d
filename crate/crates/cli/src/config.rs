//! Run configuration: a TOML file whose values command-line flags override.
//!
//! ```toml
//! [paths]
//! data = "data/projects.csv"
//! format = "seer-csv"
//! specs = "config/parameters.toml"
//! rosetta = "config/rosetta_cocomo81.csv"
//! mapping = "config/seer_cocomo_mapping.csv"
//! out = "model.json"
//! report = "report.json"
//! plots = "plots"
//!
//! [cv]
//! k = 10
//! seed = 42
//! stratify = false
//! parallel = true
//!
//! [train]
//! epochs = 60
//! learning_rate = 0.001
//! curve_prior = 0.5
//! enforce_monotone = true
//!
//! [model]
//! ctb = 2.0
//! d = 1.0
//! size_exponent = 1.2
//! staffing_exponent = 0.4
//! development_fraction = 0.393469
//! months_per_year = 12.0
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use nfseer::error::{Error, Result};
use nfseer::seer::SeerConstants;

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    pub cv: CvSection,
    pub train: TrainSection,
    pub model: ModelSection,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub data: Option<PathBuf>,
    pub format: Option<String>,
    pub specs: Option<PathBuf>,
    pub rosetta: Option<PathBuf>,
    pub mapping: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub plots: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct CvSection {
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub stratify: Option<bool>,
    pub parallel: Option<bool>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub tolerance: Option<f64>,
    pub curve_prior: Option<f64>,
    pub enforce_monotone: Option<bool>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub ctb: Option<f64>,
    pub d: Option<f64>,
    pub development_fraction: Option<f64>,
    pub staffing_exponent: Option<f64>,
    pub size_exponent: Option<f64>,
    pub months_per_year: Option<f64>,
}

impl ModelSection {
    pub fn constants(&self) -> SeerConstants {
        let base = SeerConstants::default();
        SeerConstants {
            development_fraction: self.development_fraction.unwrap_or(base.development_fraction),
            staffing_exponent: self.staffing_exponent.unwrap_or(base.staffing_exponent),
            size_exponent: self.size_exponent.unwrap_or(base.size_exponent),
            months_per_year: self.months_per_year.unwrap_or(base.months_per_year),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        RunConfig::parse(&text).map_err(|e| Error::Schema {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    pub fn parse(text: &str) -> Result<RunConfig> {
        Ok(toml::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_partial_config() {
        let c = RunConfig::parse("[cv]\nk = 5\nseed = 7\n[model]\nctb = 3.5\n").unwrap();
        assert_eq!(c.cv.k, Some(5));
        assert_eq!(c.cv.seed, Some(7));
        assert_eq!(c.model.ctb, Some(3.5));
        assert_eq!(c.model.constants(), SeerConstants::default());
        assert!(c.paths.data.is_none());
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(RunConfig::parse("[cv]\nfolds = 5\n").is_err());
    }
}
