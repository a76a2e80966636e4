//! Monte Carlo studies of the noise, the scheme and the statistics built on it.
//!
//! Replicate `r` of a study draws all its randomness from the stream
//! `(seed, r)`; replicates run in parallel and are reduced in index order, so a
//! report depends only on its configuration.

mod config;
mod presets;
mod report;
mod studies;

pub use config::{ExperimentConfig, Study, REMAINDER_MIN_EPS};
pub use presets::{preset, preset_text, PRESETS};
pub use report::{Check, FitSummary, LevelStats, PlotTable, StudyReport};
pub use studies::{
    probe_nodes, run_estimator, run_holder, run_linear_qv, run_noise_validate, run_qv_convergence, run_remainder_rate,
    run_study,
};
