//! Experiment runner: data ingestion, the series x model x replication
//! grid, statistical comparison and report files.

mod config;
mod data;
mod experiment;
mod report;
mod synth;

pub use config::{ExperimentConfig, ReportFormat};
pub use data::{load_series, parse_series, write_series_csv, NamedSeries, MIN_SERIES_LENGTH};
pub use experiment::{
    run_experiment, run_experiment_on, CellContext, Comparison, ExperimentOutcome, FailedRun,
    ForecastTrace, Metric, ModelSummary, RunRecord, SeriesSummary,
};
pub use report::{emit_report, ReportFiles};
pub use synth::{synth, SynthConfig};
