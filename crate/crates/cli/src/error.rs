use bgvar_bayes::BayesError;
use bgvar_core::gvar::GvarError;
use bgvar_core::panel::PanelError;
use bgvar_core::regress::RegressError;
use bgvar_core::stattests::StatTestError;
use bgvar_core::var::VarError;
use bgvar_core::weights::WeightError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    /// A pipeline stage failed; wraps the upstream error.
    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<CliError>,
    },
}

impl CliError {
    /// Process exit code: 2 config, 3 data, 4 numerical or analysis.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) | CliError::Io(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Stage { source, .. } => source.exit_code(),
        }
    }

    pub fn in_stage(self, stage: &'static str) -> CliError {
        match self {
            e @ CliError::Stage { .. } => e,
            e => CliError::Stage { stage, source: Box::new(e) },
        }
    }
}

impl From<PanelError> for CliError {
    fn from(e: PanelError) -> Self {
        match e {
            PanelError::Unknown { .. } => CliError::Config(e.to_string()),
            e => CliError::Data(e.to_string()),
        }
    }
}

impl From<WeightError> for CliError {
    fn from(e: WeightError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<GvarError> for CliError {
    fn from(e: GvarError) -> Self {
        match e {
            GvarError::Config(_) => CliError::Config(e.to_string()),
            GvarError::Parse { .. }
            | GvarError::Io(_)
            | GvarError::InsufficientData { .. }
            | GvarError::Collinear { .. } => CliError::Data(e.to_string()),
            GvarError::Singular { .. } | GvarError::Numerical(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<BayesError> for CliError {
    fn from(e: BayesError) -> Self {
        match e {
            BayesError::Config(_) => CliError::Config(e.to_string()),
            BayesError::Gvar(g) => g.into(),
            BayesError::Parse { .. } | BayesError::Io(_) => CliError::Data(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<StatTestError> for CliError {
    fn from(e: StatTestError) -> Self {
        match e {
            StatTestError::Config(_) => CliError::Config(e.to_string()),
            StatTestError::InsufficientData { .. } | StatTestError::Degenerate(_) => CliError::Data(e.to_string()),
            StatTestError::RankDeficient(_) | StatTestError::Numerical(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<RegressError> for CliError {
    fn from(e: RegressError) -> Self {
        match e {
            RegressError::Config(_) => CliError::Config(e.to_string()),
            RegressError::Multicollinear { .. } => CliError::Numerical(e.to_string()),
            RegressError::Dimension(_) | RegressError::InsufficientData { .. } => CliError::Data(e.to_string()),
        }
    }
}

impl From<VarError> for CliError {
    fn from(e: VarError) -> Self {
        match e {
            VarError::Config(_) => CliError::Config(e.to_string()),
            VarError::InsufficientData { .. } => CliError::Data(e.to_string()),
            VarError::Collinear { .. } | VarError::Numerical(_) => CliError::Numerical(e.to_string()),
        }
    }
}
