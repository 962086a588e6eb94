//! Desk-scale experiment harness: synthetic data, the experiment protocols,
//! significance testing and report output.

mod experiments;
mod report;
mod stats;
mod synth;

pub use experiments::{
    dataset_digest, drift_experiment, folds_for_size, imbalance_objective_experiment, run_grid, run_grid_cell,
    sampling_experiment, Approach, DriftMode, DriftOptions, DriftRun, DriftSection, GridCell, GridOptions,
    HoldoutScore, ImbalanceOptions, ImbalanceResult, ImbalanceRow, NamedCurve, SamplingArm, SamplingCell,
    SamplingOptions, SamplingResult, TuneSpec,
};
pub use report::{
    drift_csv, drift_table, emit_report, grid_csv, grid_table, imbalance_csv, imbalance_table, sampling_csv,
    sampling_table, ExperimentResult, GRID_CSV_HEADER,
};
pub use stats::{integrate, t_cdf, t_density, ttest_unpaired, TTest};
pub use synth::{synth_generate, Drift, SynthSpec, VOCAB_SIZE};
