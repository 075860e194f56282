//! Run configuration: a versioned TOML document in which every field has a
//! default and unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use bgvar_bayes::{NgPrior, Schedule};
use bgvar_core::panel::TransformSpec;
use bgvar_core::stattests::{CointDeterministic, LagSelection};
use bgvar_core::var::InfoCriterion;
use bgvar_core::Deterministic;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    /// Root seed; every stage derives its own named random stream from it.
    pub seed: u64,
    pub output_dir: PathBuf,
    pub data: DataConfig,
    /// Per-variable transformation applied after ingestion.
    pub transform: BTreeMap<String, TransformSpec>,
    pub stationarity: StationarityConfig,
    pub rolling: RollingConfig,
    pub var: VarConfig,
    pub granger: GrangerConfig,
    pub johansen: JohansenConfig,
    pub gvar: GvarConfig,
    pub bgvar: BgvarConfig,
    pub forecast: ForecastConfig,
    pub girf: GirfConfig,
    /// Directory against which relative data paths resolve; set by
    /// [`RunConfig::load`] and never serialized.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            seed: 42,
            output_dir: PathBuf::from("bgvar-report"),
            data: DataConfig::default(),
            transform: BTreeMap::new(),
            stationarity: StationarityConfig::default(),
            rolling: RollingConfig::default(),
            var: VarConfig::default(),
            granger: GrangerConfig::default(),
            johansen: JohansenConfig::default(),
            gvar: GvarConfig::default(),
            bgvar: BgvarConfig::default(),
            forecast: ForecastConfig::default(),
            girf: GirfConfig::default(),
            base_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// Long-format CSV with columns country, variable, date, value.
    pub panel: PathBuf,
    /// Square flow table with a `From/To` header.
    pub weights: PathBuf,
    /// Countries to keep, in model order; empty keeps all in file order.
    pub countries: Vec<String>,
    /// Variables to keep; empty keeps all.
    pub variables: Vec<String>,
    pub interpolate_gaps: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StationarityConfig {
    pub adf_max_lag: usize,
    pub adf_lag_selection: LagSelection,
    pub deterministic: Deterministic,
}

impl Default for StationarityConfig {
    fn default() -> Self {
        StationarityConfig {
            adf_max_lag: 1,
            adf_lag_selection: LagSelection::Fixed,
            deterministic: Deterministic::Constant,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RollingConfig {
    pub window: usize,
}

impl Default for RollingConfig {
    fn default() -> Self {
        RollingConfig { window: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VarConfig {
    pub max_lag: usize,
    pub criterion: InfoCriterion,
    pub deterministic: Deterministic,
}

impl Default for VarConfig {
    fn default() -> Self {
        VarConfig { max_lag: 4, criterion: InfoCriterion::Bic, deterministic: Deterministic::Constant }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrangerConfig {
    pub lag: usize,
}

impl Default for GrangerConfig {
    fn default() -> Self {
        GrangerConfig { lag: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JohansenConfig {
    pub lag_diffs: usize,
    pub deterministic: CointDeterministic,
}

impl Default for JohansenConfig {
    fn default() -> Self {
        JohansenConfig { lag_diffs: 1, deterministic: CointDeterministic::RestrictedConstant }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GvarConfig {
    pub deterministic: Deterministic,
    pub condition_ceiling: f64,
}

impl Default for GvarConfig {
    fn default() -> Self {
        GvarConfig {
            deterministic: Deterministic::Constant,
            condition_ceiling: bgvar_core::gvar::DEFAULT_CONDITION_CEILING,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BgvarConfig {
    pub prior: NgPrior,
    pub schedule: Schedule,
    /// Forecast and impulse responses from stable draws only.
    pub stable_only: bool,
}

impl Default for BgvarConfig {
    fn default() -> Self {
        BgvarConfig { prior: NgPrior::default(), schedule: Schedule::default(), stable_only: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForecastConfig {
    pub n_ahead: usize,
    /// Variable plotted in the fan charts (one panel per country); empty
    /// plots the first panel variable.
    pub chart_variable: String,
    /// Observed periods shown before the forecast in charts.
    pub history: usize,
    pub scenarios: Vec<ScenarioConfig>,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        ForecastConfig { n_ahead: 5, chart_variable: String::new(), history: 12, scenarios: Vec::new() }
    }
}

/// A conditional forecast holding one variable over the whole horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub country: String,
    pub variable: String,
    /// Constrained value on the model scale; absent means the last
    /// observation.
    #[serde(default)]
    pub value: Option<f64>,
    /// Half-width of the uniform band as a percentage of the constrained
    /// level; zero fixes the path exactly.
    #[serde(default)]
    pub half_width_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GirfConfig {
    /// Shocked country; empty disables the stage.
    pub shock_country: String,
    pub shock_variable: String,
    pub horizon: usize,
}

impl Default for GirfConfig {
    fn default() -> Self {
        GirfConfig { shock_country: String::new(), shock_variable: String::new(), horizon: 20 }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    /// A data path resolved against the config file's directory.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(base) if p.is_relative() => base.join(p),
            _ => p.to_path_buf(),
        }
    }

    /// Canonical TOML rendering; parsing it back gives an equal config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// The config as embedded in a bundle: data paths made absolute so the
    /// bundle's own copy reruns from anywhere, and the output location reset
    /// to the default since it does not affect results.
    pub fn canonical(&self) -> RunConfig {
        let absolute = |p: &Path| {
            let p = self.resolve(p);
            std::path::absolute(&p).unwrap_or(p)
        };
        let mut c = RunConfig { output_dir: RunConfig::default().output_dir, base_dir: None, ..self.clone() };
        c.data.panel = absolute(&self.data.panel);
        c.data.weights = absolute(&self.data.weights);
        c
    }

    /// SHA-256 of the canonical TOML, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().to_toml().as_bytes()))
    }

    /// Short form embedded in every output file.
    pub fn provenance(&self) -> String {
        format!("config={} seed={}", &self.hash()[..16], self.seed)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.bgvar.prior.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.bgvar.schedule.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.rolling.window < 3 {
            return Err(CliError::Config("rolling.window must be at least 3".into()));
        }
        if self.var.max_lag == 0 || self.granger.lag == 0 {
            return Err(CliError::Config("lag orders must be at least 1".into()));
        }
        if self.forecast.n_ahead == 0 {
            return Err(CliError::Config("forecast.n_ahead must be at least 1".into()));
        }
        if !(self.gvar.condition_ceiling > 1.0) {
            return Err(CliError::Config("gvar.condition_ceiling must exceed 1".into()));
        }
        let mut names = std::collections::BTreeSet::new();
        for s in &self.forecast.scenarios {
            if s.name.is_empty() || !s.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(CliError::Config(format!(
                    "scenario name '{}' must be nonempty ASCII letters, digits, '_' or '-'",
                    s.name
                )));
            }
            if !names.insert(s.name.as_str()) {
                return Err(CliError::Config(format!("duplicate scenario name '{}'", s.name)));
            }
            if !(s.half_width_pct.is_finite() && s.half_width_pct >= 0.0) {
                return Err(CliError::Config(format!("scenario '{}': half_width_pct must be nonnegative", s.name)));
            }
        }
        if self.girf.shock_country.is_empty() != self.girf.shock_variable.is_empty() {
            return Err(CliError::Config("girf needs both shock_country and shock_variable, or neither".into()));
        }
        Ok(())
    }
}
