use super::ingest::DatasetSchema;
use super::simulate::SimSpec;
use super::PipelineError;
use crate::links::WeibullConvention;
use crate::mcmc::ChainConfig;
use crate::models::PriorSpec;
use crate::ppca::MeanTerm;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Csv { path: PathBuf, schema: DatasetSchema },
    Simulate(SimSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum AutoTag {
    Auto,
}

/// Latent rank: a fixed number or `"auto"` (BIC selection).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KChoice {
    Fixed(usize),
    #[serde(with = "auto")]
    Auto,
}

mod auto {
    use super::AutoTag;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        AutoTag::Auto.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        AutoTag::deserialize(d).map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PpcaFitRows {
    /// Fit on the training split only.
    #[default]
    Train,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PpcaSection {
    pub enabled: bool,
    pub k: KChoice,
    /// Largest rank tried by `"auto"`; defaults to `d - 1`.
    pub k_max: Option<usize>,
    pub fit_on: PpcaFitRows,
    pub seed: u64,
    pub mean_term: MeanTerm,
}

impl Default for PpcaSection {
    fn default() -> Self {
        Self {
            enabled: false,
            k: KChoice::Auto,
            k_max: None,
            fit_on: PpcaFitRows::Train,
            seed: 0,
            mean_term: MeanTerm::ColumnMean,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    pub fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            fraction: 0.7,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    Poisson,
    Cmp,
    ProbitZtp,
    WeibullZtp,
    ProbitZtcmp,
    WeibullZtcmp,
}

impl ModelName {
    pub const ALL: [ModelName; 6] = [
        ModelName::Poisson,
        ModelName::Cmp,
        ModelName::ProbitZtp,
        ModelName::WeibullZtp,
        ModelName::ProbitZtcmp,
        ModelName::WeibullZtcmp,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelName::Poisson => "poisson",
            ModelName::Cmp => "cmp",
            ModelName::ProbitZtp => "probit_ztp",
            ModelName::WeibullZtp => "weibull_ztp",
            ModelName::ProbitZtcmp => "probit_ztcmp",
            ModelName::WeibullZtcmp => "weibull_ztcmp",
        }
    }

    pub fn is_hurdle(&self) -> bool {
        !matches!(self, ModelName::Poisson | ModelName::Cmp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinkSettings {
    pub weibull_convention: WeibullConvention,
    /// Add the log exposure to the binary gate too.
    pub binary_offset: bool,
    pub clamp: bool,
}

impl Default for LinkSettings {
    fn default() -> Self {
        Self {
            weibull_convention: WeibullConvention::Latent,
            binary_offset: false,
            clamp: false,
        }
    }
}

fn default_models() -> Vec<ModelName> {
    ModelName::ALL.to_vec()
}

fn default_replicates() -> usize {
    1_000
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSource,
    #[serde(default)]
    pub ppca: PpcaSection,
    #[serde(default)]
    pub split: SplitSpec,
    #[serde(default = "default_models")]
    pub models: Vec<ModelName>,
    #[serde(default)]
    pub prior: PriorSpec,
    #[serde(default)]
    pub mcmc: ChainConfig,
    #[serde(default)]
    pub link: LinkSettings,
    #[serde(default = "default_replicates")]
    pub predictive_replicates: usize,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.models.is_empty() {
            return Err(PipelineError::Config("model roster is empty".into()));
        }
        if !(self.split.fraction > 0.0 && self.split.fraction < 1.0) {
            return Err(PipelineError::Config(format!(
                "split fraction {} outside (0, 1)",
                self.split.fraction
            )));
        }
        if self.predictive_replicates == 0 {
            return Err(PipelineError::Config("predictive_replicates must be positive".into()));
        }
        self.mcmc.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        self.prior.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        if let KChoice::Fixed(0) = self.ppca.k {
            return Err(PipelineError::Config("ppca k must be at least 1".into()));
        }
        Ok(())
    }
}

/// Parses and validates a config file. A relative CSV path is taken
/// relative to the config file's directory.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, PipelineError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PipelineError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut config: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
    if let DataSource::Csv { path: csv_path, .. } = &mut config.data {
        if csv_path.is_relative() {
            if let Some(dir) = path.parent() {
                *csv_path = dir.join(&*csv_path);
            }
        }
    }
    config.validate()?;
    Ok(config)
}
