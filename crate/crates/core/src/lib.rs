//! Patent technology-valuation toolkit.
//!
//! The crate covers the full pipeline from raw patent records to explained
//! model selections:
//!
//! 1. [`corpus`] — parse, validate, label, and index patent records.
//! 2. [`indicators`] — compute the 50 quantitative indicators per patent and
//!    assemble the model input matrix.
//! 3. [`resampling`] — Tomek-link undersampling and deterministic stratified
//!    k-fold splits.
//! 4. [`models`] — four classifier families (elastic-net logistic regression,
//!    random forest, gradient-boosted trees, single-hidden-layer MLP), all
//!    exposing calibratable probability predictions.
//! 5. [`evalcal`] — confusion metrics, Youden's J, MCC, reliability bins,
//!    expected calibration error, and the cross-validation harness.
//! 6. [`screening`] — hyperparameter grid execution and Pareto-front
//!    screening on (ECE min, MCC max) with an F1 floor.
//! 7. [`attribution`] — exact and permutation-sampled Shapley values with
//!    confidence-binned summaries.
//!
//! Data-parallel inner loops (grid entries, CV folds, tree ensembles,
//! per-instance attributions) run on rayon when the default `parallel`
//! feature is enabled and fall back to sequential iteration without it.
//! Results are identical either way: every parallel map is order-stable and
//! all random streams are derived from explicit seeds.

pub mod attribution;
pub mod corpus;
pub mod error;
pub mod evalcal;
pub mod indicators;
pub mod models;
pub(crate) mod parallel;
pub mod resampling;
pub mod screening;
pub mod seed;

pub use error::{Error, Result};
