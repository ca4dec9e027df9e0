//! Class-imbalance handling: Tomek-link undersampling and deterministic
//! stratified k-fold splits.

mod kfold;
mod tomek;

pub use kfold::{stratified_kfold, FoldAssignment};
pub use tomek::{find_tomek_links, undersample, DistanceMetric, TomekReport};
