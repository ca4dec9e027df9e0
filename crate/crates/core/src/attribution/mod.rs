//! Shapley-value feature attribution with confidence-binned summaries.
//!
//! The conditional expectation is approximated interventionally: features
//! in a subset keep the explained row's values, the rest are drawn from a
//! background set of training rows, and the model output is averaged over
//! that set. Exact mode enumerates all feature subsets (budget-capped);
//! sampled mode walks random feature orderings.

mod shapley;
mod summary;

pub use shapley::{exact_shapley, sampled_shapley, Attribution, BackgroundSet, Predictor};
pub use summary::{
    bin_attributions, global_summary, write_attributions_csv, BinSummary, FeatureStat,
    GlobalSummary,
};

use crate::models::TrainedModel;

impl Predictor for TrainedModel {
    fn predict(&self, rows: &[Vec<f64>]) -> Vec<f64> {
        self.predict_proba(rows)
            .expect("width checked before attribution")
    }
}

impl<F> Predictor for F
where
    F: Fn(&[Vec<f64>]) -> Vec<f64> + Sync,
{
    fn predict(&self, rows: &[Vec<f64>]) -> Vec<f64> {
        self(rows)
    }
}
