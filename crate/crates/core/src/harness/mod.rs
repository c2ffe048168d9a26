//! Reproducible Monte Carlo experiments: configuration, runs, tables and fits.

pub mod config;
pub mod experiment;
pub mod fit;
pub mod table;
pub mod validate;

pub use config::{ExperimentConfig, Kind};
pub use experiment::{
    rate_curve_from_samples, run_rate_curve, run_sample, run_theta_convergence, run_zero_count_law,
    sample_key, sample_reference, with_threads, write_outputs, zero_count_table, LawSample,
    RateCurve, ThetaReport,
};
pub use fit::{fit_rate, fit_rate_with_level, RateFit};
pub use table::{ResultRow, ResultTable, CSV_HEADER};
pub use validate::{run_validate, SuiteResult, ValidationReport};
