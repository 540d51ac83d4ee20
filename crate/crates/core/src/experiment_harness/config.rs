use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dependent_clt::BandwidthRule;
use crate::error::{Error, Result};
use crate::lattice_fields::FieldModel;

/// Where the centring mean of the statistics comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanSource {
    /// Exact `E X_0` of the model.
    ModelOracle,
    /// A hypothesized value.
    Hypothesized(f64),
}

/// A Monte Carlo campaign.
///
/// TOML layout:
///
/// ```toml
/// master_seed = 20240917
/// replicates = 2000
/// n_schedule = [200, 800, 3200]
/// levels = [0.5, 0.95]
/// mean_source = "model_oracle"        # or { hypothesized = 0.5 }
///
/// [model]
/// dim = 1
/// [model.kind]
/// type = "moving_window_threshold"    # or "iid_bernoulli", "moving_window_levels"
/// radius = 1
/// theta = 0.5
/// k_min = 2
///
/// [bandwidth]
/// rule = "schedule"                   # or rule = "fixed", b = 4
/// eta = 0.3333333333333333
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: FieldModel,
    pub n_schedule: Vec<usize>,
    pub replicates: usize,
    pub master_seed: u64,
    #[serde(default = "default_bandwidth_rule")]
    pub bandwidth: BandwidthRule,
    #[serde(default = "default_mean_source")]
    pub mean_source: MeanSource,
    #[serde(default)]
    pub levels: Vec<f64>,
}

fn default_bandwidth_rule() -> BandwidthRule {
    crate::dependent_clt::EstimatorConfig::default().bandwidth
}

fn default_mean_source() -> MeanSource {
    MeanSource::ModelOracle
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.estimator().validate()?;
        if self.n_schedule.is_empty() {
            return Err(Error::Config("n_schedule is empty".into()));
        }
        if self.n_schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "n_schedule must be strictly increasing, got {:?}",
                self.n_schedule
            )));
        }
        if self.replicates < 2 {
            return Err(Error::Config("replicates must be at least 2".into()));
        }
        if let Some(l) = self.levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
            return Err(Error::Config(format!("confidence level {l} outside (0, 1)")));
        }
        Ok(())
    }

    pub fn estimator(&self) -> crate::dependent_clt::EstimatorConfig {
        crate::dependent_clt::EstimatorConfig {
            bandwidth: self.bandwidth,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
