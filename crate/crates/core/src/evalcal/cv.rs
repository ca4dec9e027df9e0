//! Stratified k-fold cross-validation. Per fold: optionally undersample
//! the training split (never the validation split), fit the model on the
//! surviving training rows, then score the held-out fold. Folds run in
//! parallel; every fold derives its own model seed, so results do not
//! depend on the schedule.

use super::{classification_metrics, confusion, ece, mcc, reliability_bins, youdens_j, MetricSet};
use crate::error::Result;
use crate::indicators::FeatureMatrix;
use crate::models::{self, apply_scaler, fit_scaler, ModelSpec};
use crate::resampling::{stratified_kfold, undersample, FoldAssignment};
use crate::seed;
use serde::{Deserialize, Serialize};

/// Harness options beyond the model spec itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvOptions {
    pub k: usize,
    /// Seed for the fold assignment and the per-fold model substreams.
    pub seed: u64,
    /// Tomek-undersample each training split before fitting.
    pub resample: bool,
    /// Reliability-bin count for the per-fold ECE.
    pub m_bins: usize,
    /// Decision threshold for class predictions.
    pub threshold: f64,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            k: 10,
            seed: 0,
            resample: true,
            m_bins: 10,
            threshold: 0.5,
        }
    }
}

/// Per-metric mean or standard deviation across folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub youdens_j: f64,
    pub mcc: f64,
    pub ece: f64,
}

impl MetricSummary {
    fn from_fn(mut f: impl FnMut(&MetricSet) -> f64, folds: &[MetricSet]) -> Vec<f64> {
        folds.iter().map(&mut f).collect()
    }

    fn mean(folds: &[MetricSet]) -> MetricSummary {
        let avg = |values: Vec<f64>| values.iter().sum::<f64>() / values.len() as f64;
        MetricSummary {
            accuracy: avg(Self::from_fn(|m| m.accuracy, folds)),
            precision: avg(Self::from_fn(|m| m.precision, folds)),
            recall: avg(Self::from_fn(|m| m.recall, folds)),
            f1: avg(Self::from_fn(|m| m.f1, folds)),
            youdens_j: avg(Self::from_fn(|m| m.youdens_j, folds)),
            mcc: avg(Self::from_fn(|m| m.mcc, folds)),
            ece: avg(Self::from_fn(|m| m.ece, folds)),
        }
    }

    fn std(folds: &[MetricSet], mean: &MetricSummary) -> MetricSummary {
        let sd = |values: Vec<f64>, mu: f64| {
            (values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / values.len() as f64)
                .sqrt()
        };
        MetricSummary {
            accuracy: sd(Self::from_fn(|m| m.accuracy, folds), mean.accuracy),
            precision: sd(Self::from_fn(|m| m.precision, folds), mean.precision),
            recall: sd(Self::from_fn(|m| m.recall, folds), mean.recall),
            f1: sd(Self::from_fn(|m| m.f1, folds), mean.f1),
            youdens_j: sd(Self::from_fn(|m| m.youdens_j, folds), mean.youdens_j),
            mcc: sd(Self::from_fn(|m| m.mcc, folds), mean.mcc),
            ece: sd(Self::from_fn(|m| m.ece, folds), mean.ece),
        }
    }
}

/// Everything one cross-validation run produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub folds: Vec<MetricSet>,
    pub mean: MetricSummary,
    pub std: MetricSummary,
    pub assignment: FoldAssignmentRef,
    /// Out-of-fold probability per matrix row.
    pub oof_probs: Vec<f64>,
    /// Training rows actually used per fold (after undersampling).
    pub train_sizes: Vec<usize>,
    /// Rows removed by Tomek undersampling per fold.
    pub tomek_removed: Vec<usize>,
}

/// The assignment is stored by value for audit emission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldAssignmentRef {
    pub k: usize,
    pub seed: u64,
    pub assignment: Vec<usize>,
}

impl PartialEq<FoldAssignment> for FoldAssignmentRef {
    fn eq(&self, other: &FoldAssignment) -> bool {
        self.k == other.k && self.seed == other.seed && self.assignment == other.assignment
    }
}

/// Cross-validate one model spec over a labeled feature matrix.
pub fn cross_validate(
    spec: &ModelSpec,
    matrix: &FeatureMatrix,
    opts: &CvOptions,
) -> Result<CvResult> {
    matrix.validate()?;
    let labels = matrix.label_floats();
    let assignment = stratified_kfold(&matrix.labels, opts.k, opts.seed)?;

    struct FoldOutcome {
        metrics: MetricSet,
        val_rows: Vec<usize>,
        val_probs: Vec<f64>,
        train_size: usize,
        removed: usize,
    }

    let outcomes = crate::parallel::map_range(opts.k, |fold| -> Result<FoldOutcome> {
        let train_idx = assignment.complement_rows(fold);
        let val_idx = assignment.fold_rows(fold);
        let mut train_rows: Vec<Vec<f64>> =
            train_idx.iter().map(|&r| matrix.rows[r].clone()).collect();
        let mut train_labels: Vec<f64> = train_idx.iter().map(|&r| labels[r]).collect();
        let train_flags: Vec<bool> = train_idx.iter().map(|&r| matrix.labels[r]).collect();

        let mut removed = 0;
        if opts.resample {
            // distances on standardized features so no indicator dominates
            let scaler = fit_scaler(&train_rows);
            let scaled = apply_scaler(&scaler, &train_rows);
            let (_, _, report) = undersample(&scaled, &train_flags)?;
            removed = report.removed.len();
            let mut keep = vec![true; train_rows.len()];
            for &r in &report.removed {
                keep[r] = false;
            }
            train_rows = train_rows
                .into_iter()
                .zip(&keep)
                .filter(|(_, &k)| k)
                .map(|(r, _)| r)
                .collect();
            train_labels = train_labels
                .into_iter()
                .zip(&keep)
                .filter(|(_, &k)| k)
                .map(|(l, _)| l)
                .collect();
        }

        let mut fold_spec = spec.clone();
        fold_spec.seed = seed::derive(spec.seed, &format!("cv/fold/{fold}"));
        let model = models::train(&fold_spec, &train_rows, &train_labels)?;

        let val_rows_data: Vec<Vec<f64>> =
            val_idx.iter().map(|&r| matrix.rows[r].clone()).collect();
        let val_truth: Vec<bool> = val_idx.iter().map(|&r| matrix.labels[r]).collect();
        let probs = model.predict_proba(&val_rows_data)?;

        let cm = confusion(&val_truth, &probs, opts.threshold)?;
        let (accuracy, precision, recall, f1) = classification_metrics(&cm);
        let j = youdens_j(&cm)?;
        let bins = reliability_bins(&val_truth, &probs, opts.m_bins)?;
        let metrics = MetricSet {
            accuracy,
            precision,
            recall,
            f1,
            youdens_j: j,
            mcc: mcc(&cm),
            ece: ece(&bins),
            confusion: cm,
            bins,
        };
        Ok(FoldOutcome {
            metrics,
            val_rows: val_idx,
            val_probs: probs,
            train_size: train_rows.len(),
            removed,
        })
    });

    let mut folds = Vec::with_capacity(opts.k);
    let mut oof_probs = vec![f64::NAN; matrix.n_rows()];
    let mut train_sizes = Vec::with_capacity(opts.k);
    let mut tomek_removed = Vec::with_capacity(opts.k);
    for outcome in outcomes {
        let outcome = outcome?;
        for (&row, &p) in outcome.val_rows.iter().zip(&outcome.val_probs) {
            oof_probs[row] = p;
        }
        train_sizes.push(outcome.train_size);
        tomek_removed.push(outcome.removed);
        folds.push(outcome.metrics);
    }

    let mean = MetricSummary::mean(&folds);
    let std = MetricSummary::std(&folds, &mean);
    Ok(CvResult {
        folds,
        mean,
        std,
        assignment: FoldAssignmentRef {
            k: assignment.k,
            seed: assignment.seed,
            assignment: assignment.assignment,
        },
        oof_probs,
        train_sizes,
        tomek_removed,
    })
}
