//! Gradient-boosted trees on logistic loss. Each stage fits a regression
//! tree to first/second-order gradient statistics; leaf values are
//! `-soft_threshold(G, l1) / (H + l2)` Newton steps, split gains use the
//! same regularized score. Raw scores start at the log-odds of the base
//! rate, which is the analytic optimum of the constant model.

use super::tree::{candidate_thresholds, TreeNode};
use super::{mean_logistic_loss_from_scores, sigmoid, FittedParams, ModelSpec, TrainMeta, TrainedModel};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    pub n_estimators: usize,
    /// Depth 0 is allowed: a single-leaf stage.
    pub max_depth: usize,
    pub learning_rate: f64,
    /// L1 soft-threshold on leaf gradient sums.
    pub l1: f64,
    /// L2 shrinkage on leaf values.
    pub l2: f64,
    /// Minimum regularized gain required to keep a split.
    pub min_split_gain: f64,
}

impl Default for BoostParams {
    fn default() -> Self {
        BoostParams {
            n_estimators: 90,
            max_depth: 6,
            learning_rate: 0.3,
            l1: 0.0,
            l2: 1.0,
            min_split_gain: 0.0,
        }
    }
}

impl BoostParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_estimators == 0 {
            return Err(Error::Config("n_estimators must be at least 1".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if self.l1 < 0.0 || self.l2 < 0.0 || self.min_split_gain < 0.0 {
            return Err(Error::Config("regularization must be nonnegative".into()));
        }
        Ok(())
    }
}

fn soft_threshold(g: f64, l1: f64) -> f64 {
    if g > l1 {
        g - l1
    } else if g < -l1 {
        g + l1
    } else {
        0.0
    }
}

fn leaf_weight(g_sum: f64, h_sum: f64, params: &BoostParams) -> f64 {
    let denom = h_sum + params.l2;
    if denom <= 1e-16 {
        0.0
    } else {
        -soft_threshold(g_sum, params.l1) / denom
    }
}

fn leaf_score(g_sum: f64, h_sum: f64, params: &BoostParams) -> f64 {
    let denom = h_sum + params.l2;
    if denom <= 1e-16 {
        0.0
    } else {
        let t = soft_threshold(g_sum, params.l1);
        t * t / denom
    }
}

struct StageGrower<'a> {
    rows: &'a [Vec<f64>],
    grad: &'a [f64],
    hess: &'a [f64],
    params: &'a BoostParams,
}

impl StageGrower<'_> {
    fn sums(&self, node_rows: &[usize]) -> (f64, f64) {
        let g = node_rows.iter().map(|&r| self.grad[r]).sum();
        let h = node_rows.iter().map(|&r| self.hess[r]).sum();
        (g, h)
    }

    fn grow(&self, node_rows: Vec<usize>, depth: usize) -> TreeNode {
        let (g_sum, h_sum) = self.sums(&node_rows);
        if depth >= self.params.max_depth || node_rows.len() < 2 {
            return TreeNode::Leaf {
                value: leaf_weight(g_sum, h_sum, self.params),
            };
        }
        let parent_score = leaf_score(g_sum, h_sum, self.params);
        let width = self.rows[0].len();
        let mut best: Option<(f64, usize, f64)> = None;
        for feature in 0..width {
            for threshold in candidate_thresholds(self.rows, &node_rows, feature) {
                let mut gl = 0.0;
                let mut hl = 0.0;
                for &r in &node_rows {
                    if self.rows[r][feature] <= threshold {
                        gl += self.grad[r];
                        hl += self.hess[r];
                    }
                }
                let gain = 0.5
                    * (leaf_score(gl, hl, self.params)
                        + leaf_score(g_sum - gl, h_sum - hl, self.params)
                        - parent_score);
                let better = match best {
                    None => gain > self.params.min_split_gain + 1e-12,
                    Some((bg, bf, bt)) => {
                        gain > bg + 1e-12
                            || ((gain - bg).abs() <= 1e-12
                                && (feature < bf || (feature == bf && threshold < bt)))
                    }
                };
                if better {
                    best = Some((gain, feature, threshold));
                }
            }
        }
        let Some((_, feature, threshold)) = best else {
            return TreeNode::Leaf {
                value: leaf_weight(g_sum, h_sum, self.params),
            };
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = node_rows
            .into_iter()
            .partition(|&r| self.rows[r][feature] <= threshold);
        TreeNode::Split {
            feature,
            threshold,
            left: Box::new(self.grow(left_rows, depth + 1)),
            right: Box::new(self.grow(right_rows, depth + 1)),
        }
    }
}

pub fn train_gradient_boosting(
    spec: &ModelSpec,
    params: &BoostParams,
    rows: &[Vec<f64>],
    labels: &[f64],
) -> Result<TrainedModel> {
    let n = rows.len();
    let base_rate = (labels.iter().sum::<f64>() / n as f64).clamp(1e-12, 1.0 - 1e-12);
    let base_score = (base_rate / (1.0 - base_rate)).ln();

    let mut scores = vec![base_score; n];
    let mut trees = Vec::with_capacity(params.n_estimators);
    let mut loss_trace = Vec::with_capacity(params.n_estimators + 1);
    loss_trace.push(mean_logistic_loss_from_scores(&scores, labels));

    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    for stage in 0..params.n_estimators {
        for i in 0..n {
            let p = sigmoid(scores[i]);
            grad[i] = p - labels[i];
            hess[i] = p * (1.0 - p);
        }
        let grower = StageGrower {
            rows,
            grad: &grad,
            hess: &hess,
            params,
        };
        let tree = grower.grow((0..n).collect(), 0);
        for (i, row) in rows.iter().enumerate() {
            scores[i] += params.learning_rate * tree.predict(row);
            if !scores[i].is_finite() {
                return Err(Error::NonFinite {
                    what: "score".into(),
                    unit: "stage".into(),
                    index: stage,
                });
            }
        }
        trees.push(tree);
        loss_trace.push(mean_logistic_loss_from_scores(&scores, labels));
    }

    Ok(TrainedModel {
        spec: spec.clone(),
        n_features: rows[0].len(),
        scaler: None,
        params: FittedParams::Gbt { base_score, trees },
        meta: TrainMeta {
            loss_trace,
            seed: spec.seed,
        },
    })
}
