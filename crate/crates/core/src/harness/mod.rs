//! Data ingestion, instance sampling, the budget sweep and report output.

mod analysis;
mod data;
mod instance;
mod report;

pub use analysis::{
    analyze, analyze_instance, row_seed, run_experiment, soundness_violations, AnalysisOptions, AnalysisReport,
    CurvatureReport, ExperimentConfig, SoundnessViolation, ValidateMode, AUTO_VALIDATE_MAX, SOUNDNESS_TOL,
};
pub use data::{load_features_csv, load_ratings_csv, synth_features, synth_ratings, synth_weights};
pub use instance::{
    sample_instance, Family, FeatureSource, Instance, InstanceSpec, RatingsSource, DEFAULT_DIM, DEFAULT_USERS,
};
pub use report::{csv_columns, emit_report, fmt_sig, read_json_reports, write_report, Format, CSV_HEADER, CSV_NOTIONS};
