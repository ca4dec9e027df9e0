//! Random forest of CART trees: bootstrap samples, greedy Gini splits over
//! a random feature subset per node, leaves holding positive-class
//! frequencies. `predict_proba` averages per-tree leaf frequencies.

use super::tree::{candidate_thresholds, TreeNode};
use super::{FittedParams, ModelSpec, TrainMeta, TrainedModel};
use crate::error::{Error, Result};
use crate::parallel;
use crate::seed;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features drawn per node; `None` means floor(sqrt(width)), min 1.
    pub features_per_split: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 50,
            max_depth: 20,
            min_leaf: 1,
            features_per_split: None,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("n_trees must be at least 1".into()));
        }
        if self.max_depth < 1 {
            return Err(Error::Config("max_depth must be at least 1".into()));
        }
        if self.min_leaf == 0 {
            return Err(Error::Config("min_leaf must be at least 1".into()));
        }
        if self.features_per_split == Some(0) {
            return Err(Error::Config("features_per_split must be at least 1".into()));
        }
        Ok(())
    }
}

fn gini(pos: f64, total: f64) -> f64 {
    if total == 0.0 {
        return 0.0;
    }
    let p = pos / total;
    1.0 - p * p - (1.0 - p) * (1.0 - p)
}

struct Grower<'a> {
    rows: &'a [Vec<f64>],
    labels: &'a [f64],
    params: &'a ForestParams,
    n_candidates: usize,
}

impl Grower<'_> {
    fn leaf(&self, node_rows: &[usize]) -> TreeNode {
        let pos: f64 = node_rows.iter().map(|&r| self.labels[r]).sum();
        TreeNode::Leaf {
            value: pos / node_rows.len() as f64,
        }
    }

    fn grow(&self, node_rows: Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> TreeNode {
        let total = node_rows.len() as f64;
        let pos: f64 = node_rows.iter().map(|&r| self.labels[r]).sum();
        let parent_impurity = gini(pos, total);
        if depth >= self.params.max_depth
            || parent_impurity == 0.0
            || node_rows.len() < 2 * self.params.min_leaf
        {
            return self.leaf(&node_rows);
        }

        let width = self.rows[0].len();
        let mut features: Vec<usize> = (0..width).collect();
        if self.n_candidates < width {
            features.shuffle(rng);
            features.truncate(self.n_candidates);
            features.sort_unstable();
        }

        let mut best: Option<(f64, usize, f64)> = None; // (gain, feature, threshold)
        for &feature in &features {
            for threshold in candidate_thresholds(self.rows, &node_rows, feature) {
                let mut left_n = 0.0;
                let mut left_pos = 0.0;
                for &r in &node_rows {
                    if self.rows[r][feature] <= threshold {
                        left_n += 1.0;
                        left_pos += self.labels[r];
                    }
                }
                let right_n = total - left_n;
                if (left_n as usize) < self.params.min_leaf
                    || (right_n as usize) < self.params.min_leaf
                {
                    continue;
                }
                let right_pos = pos - left_pos;
                let weighted = (left_n * gini(left_pos, left_n)
                    + right_n * gini(right_pos, right_n))
                    / total;
                let gain = parent_impurity - weighted;
                let better = match best {
                    None => gain > 1e-12,
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
            return self.leaf(&node_rows);
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = node_rows
            .into_iter()
            .partition(|&r| self.rows[r][feature] <= threshold);
        TreeNode::Split {
            feature,
            threshold,
            left: Box::new(self.grow(left_rows, depth + 1, rng)),
            right: Box::new(self.grow(right_rows, depth + 1, rng)),
        }
    }
}

pub fn train_random_forest(
    spec: &ModelSpec,
    params: &ForestParams,
    rows: &[Vec<f64>],
    labels: &[f64],
) -> Result<TrainedModel> {
    let width = rows[0].len();
    let n_candidates = params
        .features_per_split
        .unwrap_or_else(|| ((width as f64).sqrt().floor() as usize).max(1))
        .min(width);
    let grower = Grower {
        rows,
        labels,
        params,
        n_candidates,
    };

    // Each tree owns an independent substream, so building trees in
    // parallel cannot change the result.
    let trees: Vec<TreeNode> = parallel::map_range(params.n_trees, |t| {
        let mut rng = seed::rng(seed::derive(spec.seed, &format!("tree/{t}")));
        let sample: Vec<usize> = (0..rows.len()).map(|_| rng.gen_range(0..rows.len())).collect();
        grower.grow(sample, 0, &mut rng)
    });

    Ok(TrainedModel {
        spec: spec.clone(),
        n_features: width,
        scaler: None,
        params: FittedParams::Rf { trees },
        meta: TrainMeta {
            loss_trace: Vec::new(),
            seed: spec.seed,
        },
    })
}
