//! Evaluation: pose and object errors, the success rule, Pearson statistics,
//! the end-to-end pipeline, weight sweeps and the benchmark runner.

mod bench;
mod errors;
mod pipeline;
mod stats;

pub use bench::{
    aggregate, run_benchmark, BENCH_ICP_TOLERANCE, BENCH_MERGE_RADIUS, trials_csv, weight_sweep, write_json, write_trials_csv, AggregateReport, BenchConfig,
    BenchReport, ConditionSummary, ErrorMeans, OcclusionBin, SweepReport, SweepRow, WeightTable, OCCLUSION_BINS,
    REPORT_JSON, SWEEP_CSV, SWEEP_JSON, TRIALS_CSV,
};
pub use errors::{
    classify_success, pose_errors, rotation_error_deg, symmetric_rotation_error_deg, ErrorModel, PoseErrors,
    SUCCESS_ROTATION_DEG, SUCCESS_TRANSLATION_MM,
};
pub use pipeline::{
    estimate_pose, run_trial, sensor_cloud, Condition, Estimate, ModelTarget, PipelineConfig, TrialRecord, Weighting,
};
pub use stats::{pearson, Correlation};
