//! Cross-validation and the metrics reported for both estimation modes.

mod confusion;
mod cv;
mod folds;
mod metrics;

pub use confusion::{confusion, ConfusionMatrix};
pub use cv::{
    cross_validate, cross_validate_two, CoordinateMetrics, DetectionMetrics, LocalisationMetrics,
    MetricsReport, RegressionMetrics, SharingBreakdown, SharingGroup, SingleReport, Summary,
    TwoReport,
};
pub use folds::{stratified_kfold, FoldPlan};
pub use metrics::{accuracy, mse, r2};
