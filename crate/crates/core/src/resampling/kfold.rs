//! Deterministic stratified k-fold assignment.
//!
//! Each class is shuffled with a seeded stream and spread across folds as
//! evenly as possible; the per-class remainders are placed on the folds
//! with the smallest running totals so overall fold sizes differ by at
//! most one.

use crate::error::{Error, Result};
use crate::seed;
use rand::seq::SliceRandom;
use serde::Serialize;

/// Row-to-fold mapping for one cross-validation run.
#[derive(Debug, Clone, Serialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub seed: u64,
    /// fold id in `[0, k)` per row.
    pub assignment: Vec<usize>,
}

impl FoldAssignment {
    /// Rows of one fold, ascending.
    pub fn fold_rows(&self, fold: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &f)| f == fold)
            .map(|(i, _)| i)
            .collect()
    }

    /// Rows outside one fold, ascending.
    pub fn complement_rows(&self, fold: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &f)| f != fold)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Assign rows to `k` stratified folds. Every class must have at least `k`
/// members.
pub fn stratified_kfold(labels: &[bool], k: usize, seed_value: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::Config(format!("k must be at least 2, got {k}")));
    }
    let mut classes: Vec<(bool, Vec<usize>)> = vec![(false, Vec::new()), (true, Vec::new())];
    for (i, &label) in labels.iter().enumerate() {
        classes[usize::from(label)].1.push(i);
    }
    for (label, members) in &classes {
        if members.len() < k {
            return Err(Error::ClassSmallerThanK {
                class: if *label { "VP" } else { "NVP" }.to_string(),
                count: members.len(),
                k,
            });
        }
    }

    let mut assignment = vec![0usize; labels.len()];
    let mut fold_totals = vec![0usize; k];
    for (label, members) in &mut classes {
        let mut rng = seed::rng(seed::derive(
            seed_value,
            &format!("kfold/{}", if *label { "pos" } else { "neg" }),
        ));
        members.shuffle(&mut rng);

        let base = members.len() / k;
        let extras = members.len() % k;
        // folds receiving one extra member: the currently lightest ones
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&f| (fold_totals[f], f));
        let mut per_fold = vec![base; k];
        for &f in order.iter().take(extras) {
            per_fold[f] += 1;
        }

        let mut cursor = 0;
        for fold in 0..k {
            for _ in 0..per_fold[fold] {
                assignment[members[cursor]] = fold;
                cursor += 1;
            }
            fold_totals[fold] += per_fold[fold];
        }
    }

    Ok(FoldAssignment {
        k,
        seed: seed_value,
        assignment,
    })
}
