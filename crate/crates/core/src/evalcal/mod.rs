//! Evaluation and calibration: confusion-based metrics, imbalance-aware
//! metrics, reliability bins with expected calibration error, and the
//! k-fold cross-validation harness.

mod calibration;
mod cv;
mod metrics;

pub use calibration::{ece, reliability_bins, write_bins_csv, ReliabilityBin};
pub use cv::{cross_validate, CvOptions, CvResult, FoldAssignmentRef, MetricSummary};
pub use metrics::{
    classification_metrics, confusion, mcc, youdens_j, ConfusionMatrix, MetricSet,
};
