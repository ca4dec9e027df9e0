//! Binary decision-tree node shared by the forest (Gini leaves hold class
//! frequencies) and the booster (leaves hold additive weights).
//!
//! Split convention: `row[feature] <= threshold` goes left. Thresholds are
//! midpoints between consecutive distinct sorted values; ties between
//! candidate splits break toward the lowest feature index, then the lowest
//! threshold.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum TreeNode {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn predict(&self, row: &[f64]) -> f64 {
        match self {
            TreeNode::Leaf { value } => *value,
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if row[*feature] <= *threshold {
                    left.predict(row)
                } else {
                    right.predict(row)
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }
}

/// Candidate thresholds for `feature` over the rows in `node_rows`:
/// midpoints between consecutive distinct values, ascending.
pub(crate) fn candidate_thresholds(
    rows: &[Vec<f64>],
    node_rows: &[usize],
    feature: usize,
) -> Vec<f64> {
    let mut values: Vec<f64> = node_rows.iter().map(|&r| rows[r][feature]).collect();
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite feature values"));
    values.dedup();
    values
        .windows(2)
        .map(|w| w[0] + (w[1] - w[0]) / 2.0)
        .collect()
}
