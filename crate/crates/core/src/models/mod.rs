//! The four classifier families, each trained from scratch and exposing
//! probability predictions: elastic-net logistic regression, random forest,
//! gradient-boosted trees on logistic loss, and a single-hidden-layer MLP.
//!
//! Linear and neural models train on standardized features; tree models
//! train on raw features (splits are scale-invariant). Training is
//! deterministic for a fixed spec, seed, and data.

mod forest;
mod gbt;
mod logistic;
mod mlp;
mod scaler;
mod tree;

pub use forest::{train_random_forest, ForestParams};
pub use gbt::{train_gradient_boosting, BoostParams};
pub use logistic::{lr_loss_and_gradient, train_logistic_elastic_net, LogisticParams};
pub use mlp::{train_mlp, MlpGradient, MlpNetwork, MlpParams};
pub use scaler::{apply_scaler, fit_scaler, Scaler};
pub use tree::TreeNode;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Family-specific hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FamilyParams {
    Lr(LogisticParams),
    Rf(ForestParams),
    Gbt(BoostParams),
    Nn(MlpParams),
}

impl FamilyParams {
    pub fn family_name(&self) -> &'static str {
        match self {
            FamilyParams::Lr(_) => "LR",
            FamilyParams::Rf(_) => "RF",
            FamilyParams::Gbt(_) => "GBT",
            FamilyParams::Nn(_) => "NN",
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            FamilyParams::Lr(p) => p.validate(),
            FamilyParams::Rf(p) => p.validate(),
            FamilyParams::Gbt(p) => p.validate(),
            FamilyParams::Nn(p) => p.validate(),
        }
    }
}

/// One model configuration: family, hyperparameters, and the seed driving
/// every random choice inside training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub seed: u64,
    #[serde(flatten)]
    pub params: FamilyParams,
}

impl ModelSpec {
    pub fn family_name(&self) -> &'static str {
        self.params.family_name()
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()
    }

    /// Compact single-line description for report tables.
    pub fn describe(&self) -> String {
        match &self.params {
            FamilyParams::Lr(p) => format!(
                "alpha={} lambda={} epochs={} lr={}",
                p.alpha, p.lambda, p.epochs, p.learning_rate
            ),
            FamilyParams::Rf(p) => format!(
                "trees={} depth={} min_leaf={} feats={}",
                p.n_trees,
                p.max_depth,
                p.min_leaf,
                p.features_per_split
                    .map_or("sqrt".to_string(), |f| f.to_string())
            ),
            FamilyParams::Gbt(p) => format!(
                "estimators={} depth={} lr={} l1={} l2={}",
                p.n_estimators, p.max_depth, p.learning_rate, p.l1, p.l2
            ),
            FamilyParams::Nn(p) => format!(
                "hidden={} dropout={} epochs={} lr={} batch={}",
                p.hidden, p.dropout, p.epochs, p.learning_rate, p.batch_size
            ),
        }
    }
}

/// Training byproducts kept for audits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    /// Objective value per epoch or stage; empty for forests.
    pub loss_trace: Vec<f64>,
    pub seed: u64,
}

/// Fitted parameters, opaque to callers except through `predict_proba`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FittedParams {
    Lr {
        weights: Vec<f64>,
        intercept: f64,
    },
    Rf {
        trees: Vec<TreeNode>,
    },
    Gbt {
        base_score: f64,
        trees: Vec<TreeNode>,
    },
    Nn {
        w1: Vec<Vec<f64>>,
        b1: Vec<f64>,
        w2: Vec<f64>,
        b2: f64,
    },
}

/// A trained classifier: spec, optional feature scaler, and parameters.
/// Immutable and safe for concurrent prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub n_features: usize,
    pub scaler: Option<Scaler>,
    pub params: FittedParams,
    pub meta: TrainMeta,
}

impl TrainedModel {
    /// Positive-class probabilities for a batch of rows. The model's own
    /// scaler, when fitted, is applied internally.
    pub fn predict_proba(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        for row in rows {
            if row.len() != self.n_features {
                return Err(Error::WidthMismatch {
                    expected: self.n_features,
                    actual: row.len(),
                });
            }
        }
        let scaled;
        let input: &[Vec<f64>] = match &self.scaler {
            Some(s) => {
                scaled = apply_scaler(s, rows);
                &scaled
            }
            None => rows,
        };
        Ok(match &self.params {
            FittedParams::Lr { weights, intercept } => input
                .iter()
                .map(|row| logistic::predict_one(weights, *intercept, row))
                .collect(),
            FittedParams::Rf { trees } => input
                .iter()
                .map(|row| {
                    trees.iter().map(|t| t.predict(row)).sum::<f64>() / trees.len() as f64
                })
                .collect(),
            FittedParams::Gbt { base_score, trees } => {
                let lr = match &self.spec.params {
                    FamilyParams::Gbt(p) => p.learning_rate,
                    _ => 1.0,
                };
                input
                    .iter()
                    .map(|row| {
                        let score = base_score
                            + lr * trees.iter().map(|t| t.predict(row)).sum::<f64>();
                        sigmoid(score)
                    })
                    .collect()
            }
            FittedParams::Nn { w1, b1, w2, b2 } => {
                let net = MlpNetwork {
                    w1: w1.clone(),
                    b1: b1.clone(),
                    w2: w2.clone(),
                    b2: *b2,
                };
                input.iter().map(|row| net.forward(row)).collect()
            }
        })
    }
}

/// Train a model per its spec. Inputs are raw (unscaled) feature rows and
/// 0/1 labels; families that standardize do so internally.
pub fn train(spec: &ModelSpec, rows: &[Vec<f64>], labels: &[f64]) -> Result<TrainedModel> {
    spec.validate()?;
    if rows.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if rows.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: rows.len(),
            right: labels.len(),
        });
    }
    let width = rows[0].len();
    for row in rows {
        if row.len() != width {
            return Err(Error::WidthMismatch {
                expected: width,
                actual: row.len(),
            });
        }
    }
    match &spec.params {
        FamilyParams::Lr(p) => train_logistic_elastic_net(spec, p, rows, labels),
        FamilyParams::Rf(p) => train_random_forest(spec, p, rows, labels),
        FamilyParams::Gbt(p) => train_gradient_boosting(spec, p, rows, labels),
        FamilyParams::Nn(p) => train_mlp(spec, p, rows, labels),
    }
}

/// Serialize a model as self-describing JSON.
pub fn save_model<W: std::io::Write>(model: &TrainedModel, mut out: W) -> Result<()> {
    let json = serde_json::to_string(model)
        .map_err(|e| Error::Invalid(format!("serialize model: {e}")))?;
    out.write_all(json.as_bytes())
        .and_then(|()| out.write_all(b"\n"))
        .map_err(|e| Error::io("<model json>", e))
}

/// Load a model saved by [`save_model`]. Predictions of the the loaded
/// model are identical to the original's.
pub fn load_model(path: &std::path::Path) -> Result<TrainedModel> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^x) without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Mean logistic loss of probabilities against 0/1 labels, computed from
/// raw scores for stability.
pub(crate) fn mean_logistic_loss_from_scores(scores: &[f64], labels: &[f64]) -> f64 {
    let n = scores.len() as f64;
    scores
        .iter()
        .zip(labels)
        .map(|(&z, &y)| {
            let sign = if y > 0.5 { -1.0 } else { 1.0 };
            softplus(sign * z)
        })
        .sum::<f64>()
        / n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_is_stable_and_bounded() {
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
        assert!(sigmoid(800.0) <= 1.0);
        assert!(sigmoid(-800.0) >= 0.0);
        assert!((sigmoid(2.0) + sigmoid(-2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn spec_json_is_self_describing() {
        let spec = ModelSpec {
            seed: 7,
            params: FamilyParams::Rf(ForestParams {
                n_trees: 5,
                max_depth: 3,
                min_leaf: 1,
                features_per_split: None,
            }),
        };
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"family\":\"rf\""), "{json}");
        let back: ModelSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
    }
}
