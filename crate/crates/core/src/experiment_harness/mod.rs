//! Reproducible Monte Carlo campaigns for the normal approximation of
//! partial sums on growing cubes.

mod config;
mod ks;
mod report;
mod run;

pub use config::{ExperimentConfig, MeanSource};
pub use ks::{dkw_radius, fit_rate, ks_distance, RateFit};
pub use report::{report_csv, report_metadata_json, sidecar_path, write_report, CSV_COLUMNS};
pub use run::{
    coverage_study, estimator_consistency, replicate_seed, run_clt_experiment, ConsistencyReport,
    ConsistencyRow, CoverageRow, ExperimentReport, ModeFit, ReportRow,
};
