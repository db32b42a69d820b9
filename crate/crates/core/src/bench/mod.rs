//! Benchmark harness: paired SA/FV experiments, metrics, the hitting-time
//! study and file export.

pub mod experiment;
pub mod export;
pub mod hitting;
pub mod metrics;

use thiserror::Error;

use crate::fv::FvError;
use crate::landscape::{LandscapeError, LandscapeFileError};
use crate::objective::ObjectiveError;
use crate::qaoa::{GraphFileError, QaoaError};

pub use experiment::{
    draw_ansatze, prepare_functions, run_paired, run_paired_experiment, run_replication, AnsatzRule, BenchFunction,
    ExperimentSpec, Instance, Method, ObjectiveSpec, QaoaSpec, RunOutput, RunRecord, SyntheticSpec,
};
pub use export::{
    parse_csv, summarize, write_csv, write_event_logs, write_plot_data, write_summary, FunctionSummary, CSV_HEADER,
};
pub use hitting::{hitting_time_study, HittingCell, HittingReport, HittingSpec, HittingTrial};
pub use metrics::{advantage, median, relative_error, MeanCi, Spread};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("ansatz rule is infeasible: {0}")]
    AnsatzInfeasible(String),
    #[error("optimum and worst value coincide ({fstar} = {fworst}); relative error is undefined")]
    DegenerateRange { fstar: f64, fworst: f64 },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed results file: {0}")]
    Parse(String),
    #[error(transparent)]
    Landscape(#[from] LandscapeError),
    #[error(transparent)]
    LandscapeFile(#[from] LandscapeFileError),
    #[error(transparent)]
    GraphFile(#[from] GraphFileError),
    #[error(transparent)]
    Qaoa(#[from] QaoaError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Fv(#[from] FvError),
}

impl BenchError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Whether the error stems from reading or writing files.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            BenchError::Io { .. }
                | BenchError::LandscapeFile(LandscapeFileError::Io(_))
                | BenchError::GraphFile(GraphFileError::Io(_))
        )
    }
}
