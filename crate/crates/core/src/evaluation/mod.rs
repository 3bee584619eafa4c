//! Explanation quality metrics, the synthetic data generator, and the
//! experiment runners that aggregate metrics into CSV reports.

mod experiment;
mod metrics;
mod synthetic;

pub use experiment::{
    run_scaling_experiment, run_table_experiment, table_datasets, ExperimentOptions,
    ExperimentReport, Explainer, ReportRow, ScalingConfig, TableDataset, CSV_HEADER,
};
pub use metrics::{
    euclidean_distance, instance_difference, weights_difference, Metric, MetricResult,
};
pub use synthetic::{synthetic_dataset, synthetic_feature_counts, SyntheticSpec};
