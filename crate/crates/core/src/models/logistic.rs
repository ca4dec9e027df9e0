//! Elastic-net logistic regression trained by full-batch proximal gradient
//! descent with backtracking, on standardized features. The penalty is
//! `lambda * (alpha * |w|_1 + (1 - alpha) / 2 * |w|_2^2)`; the intercept is
//! unpenalized.

use super::{
    apply_scaler, fit_scaler, sigmoid, softplus, FittedParams, ModelSpec, TrainMeta, TrainedModel,
};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    /// L1 share of the penalty, in [0, 1]. 0 is ridge, 1 is lasso.
    pub alpha: f64,
    /// Overall penalty strength, >= 0.
    pub lambda: f64,
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            alpha: 0.5,
            lambda: 0.005,
            epochs: 100,
            learning_rate: 0.5,
        }
    }
}

impl LogisticParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        if self.lambda < 0.0 {
            return Err(Error::Config("lambda must be nonnegative".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// Smooth part of the objective (mean logistic loss plus the L2 term) and
/// its gradient in (weights, intercept). Public so gradient checks can run
/// against central finite differences.
pub fn lr_loss_and_gradient(
    weights: &[f64],
    intercept: f64,
    rows: &[Vec<f64>],
    labels: &[f64],
    l2: f64,
) -> (f64, Vec<f64>, f64) {
    let n = rows.len() as f64;
    let mut loss = 0.0;
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for (row, &y) in rows.iter().zip(labels) {
        let z = intercept + dot(weights, row);
        let sign = if y > 0.5 { -1.0 } else { 1.0 };
        loss += softplus(sign * z);
        let residual = sigmoid(z) - y;
        grad_b += residual;
        for (g, &x) in grad_w.iter_mut().zip(row) {
            *g += residual * x;
        }
    }
    loss /= n;
    grad_b /= n;
    for (g, &w) in grad_w.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    loss += 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>();
    (loss, grad_w, grad_b)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn l1_norm(w: &[f64]) -> f64 {
    w.iter().map(|v| v.abs()).sum()
}

fn soft(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

pub(crate) fn predict_one(weights: &[f64], intercept: f64, row: &[f64]) -> f64 {
    sigmoid(intercept + dot(weights, row))
}

pub fn train_logistic_elastic_net(
    spec: &ModelSpec,
    params: &LogisticParams,
    rows: &[Vec<f64>],
    labels: &[f64],
) -> Result<TrainedModel> {
    let positives = labels.iter().filter(|&&y| y > 0.5).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::SingleClass);
    }
    let scaler = fit_scaler(rows);
    let x = apply_scaler(&scaler, rows);
    let width = x[0].len();
    let l1 = params.lambda * params.alpha;
    let l2 = params.lambda * (1.0 - params.alpha);

    let objective = |w: &[f64], b: f64| {
        let (smooth, _, _) = lr_loss_and_gradient(w, b, &x, labels, l2);
        smooth + l1 * l1_norm(w)
    };

    let mut weights = vec![0.0; width];
    let mut intercept = 0.0;
    let mut step = params.learning_rate;
    let mut current = objective(&weights, intercept);
    let mut loss_trace = vec![current];

    for epoch in 0..params.epochs {
        let (_, grad_w, grad_b) = lr_loss_and_gradient(&weights, intercept, &x, labels, l2);
        // backtracking proximal step: shrink until the full objective does
        // not increase, so the trace is nonincreasing by construction
        let mut accepted = false;
        for _ in 0..60 {
            let cand_w: Vec<f64> = weights
                .iter()
                .zip(&grad_w)
                .map(|(&w, &g)| soft(w - step * g, step * l1))
                .collect();
            let cand_b = intercept - step * grad_b;
            let cand_obj = objective(&cand_w, cand_b);
            if !cand_obj.is_finite() {
                return Err(Error::NonFinite {
                    what: "loss".into(),
                    unit: "epoch".into(),
                    index: epoch,
                });
            }
            if cand_obj <= current + 1e-12 {
                weights = cand_w;
                intercept = cand_b;
                current = cand_obj;
                accepted = true;
                break;
            }
            step /= 2.0;
        }
        if !accepted {
            // step has collapsed; we are at a stationary point
            loss_trace.push(current);
            continue;
        }
        loss_trace.push(current);
        step = (step * 1.25).min(params.learning_rate);
    }

    Ok(TrainedModel {
        spec: spec.clone(),
        n_features: width,
        scaler: Some(scaler),
        params: FittedParams::Lr { weights, intercept },
        meta: TrainMeta {
            loss_trace,
            seed: spec.seed,
        },
    })
}
