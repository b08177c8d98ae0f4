//! End-to-end driver: ingestion, splitting, simulation, fitting and reports.

mod audit;
mod config;
mod ingest;
mod run;
mod simulate;
mod split;

pub use audit::RowAudit;
pub use config::{
    load_config, DataSource, ExperimentConfig, KChoice, LinkSettings, ModelName, PpcaFitRows,
    PpcaSection, SplitSpec,
};
pub use ingest::{
    ingest, ingest_reader, CategoricalColumn, DatasetSchema, IngestWarning, IngestedData,
    NumericColumn, Transform,
};
pub use run::{
    prepare, run_experiment, run_fit, run_ppca, run_report, run_validate, ComponentReport,
    ModelReport, ModelStatus, Prepared, RunSummary,
};
pub use simulate::{simulate, write_simulation_csv, SimKind, SimSpec, SimTruth, SimulatedData};
pub use split::split_indices;

use crate::diagnostics::DiagnosticsError;
use crate::mcmc::McmcError;
use crate::models::ModelError;
use crate::ppca::PpcaError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("schema violation{}: {message}", row.map(|r| format!(" at row {r}")).unwrap_or_default())]
    SchemaViolation { row: Option<usize>, message: String },
    #[error("config error: {0}")]
    Config(String),
    #[error("{} model(s) failed: {}", .0.len(), .0.iter().map(|(m, e)| format!("{m}: {e}")).collect::<Vec<_>>().join("; "))]
    FitFailure(Vec<(String, String)>),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Ppca(#[from] PpcaError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    Mcmc(#[from] McmcError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl PipelineError {
    pub(crate) fn schema(row: Option<usize>, message: impl Into<String>) -> Self {
        PipelineError::SchemaViolation {
            row,
            message: message.into(),
        }
    }

    /// Process exit code: 2 schema violation, 3 fit failure, 4 config error, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::SchemaViolation { .. } => 2,
            PipelineError::FitFailure(_) => 3,
            PipelineError::Config(_) => 4,
            _ => 1,
        }
    }
}
