//! Single-hidden-layer MLP: input dropout (inverted convention, training
//! only), rectified-linear hidden units, sigmoid output, Adam on logistic
//! loss. Deterministic for a fixed seed: initialization, batch order, and
//! dropout masks all come from seeded substreams.

use super::{
    apply_scaler, fit_scaler, sigmoid, softplus, FittedParams, ModelSpec, TrainMeta, TrainedModel,
};
use crate::error::{Error, Result};
use crate::seed;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden: usize,
    /// Input dropout rate in [0, 1).
    pub dropout: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: 100,
            dropout: 0.1,
            epochs: 100,
            learning_rate: 0.005,
            batch_size: 32,
        }
    }
}

impl MlpParams {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 {
            return Err(Error::Config("hidden must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!(
                "dropout {} outside [0, 1)",
                self.dropout
            )));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch_size must be positive".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// The network parameters, exposed for gradient checking.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpNetwork {
    pub w1: Vec<Vec<f64>>, // [hidden][input]
    pub b1: Vec<f64>,      // [hidden]
    pub w2: Vec<f64>,      // [hidden]
    pub b2: f64,
}

/// Gradient with the same shape as the network.
#[derive(Debug, Clone)]
pub struct MlpGradient {
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl MlpNetwork {
    /// Xavier-uniform initialization from a seeded stream.
    pub fn new_seeded(inputs: usize, hidden: usize, seed_value: u64) -> Self {
        let mut rng = seed::rng(seed_value);
        let s1 = (6.0 / (inputs + hidden) as f64).sqrt();
        let s2 = (6.0 / (hidden + 1) as f64).sqrt();
        let w1 = (0..hidden)
            .map(|_| (0..inputs).map(|_| rng.gen_range(-s1..s1)).collect())
            .collect();
        let w2 = (0..hidden).map(|_| rng.gen_range(-s2..s2)).collect();
        MlpNetwork {
            w1,
            b1: vec![0.0; hidden],
            w2,
            b2: 0.0,
        }
    }

    fn raw_score(&self, row: &[f64]) -> f64 {
        let mut z = self.b2;
        for (unit, (w_row, b)) in self.w1.iter().zip(&self.b1).enumerate() {
            let pre: f64 = b + w_row.iter().zip(row).map(|(w, x)| w * x).sum::<f64>();
            if pre > 0.0 {
                z += self.w2[unit] * pre;
            }
        }
        z
    }

    /// Positive-class probability for one row (no dropout).
    pub fn forward(&self, row: &[f64]) -> f64 {
        sigmoid(self.raw_score(row))
    }

    /// Mean logistic loss over rows (no dropout).
    pub fn mean_loss(&self, rows: &[Vec<f64>], labels: &[f64]) -> f64 {
        let n = rows.len() as f64;
        rows.iter()
            .zip(labels)
            .map(|(row, &y)| {
                let z = self.raw_score(row);
                let sign = if y > 0.5 { -1.0 } else { 1.0 };
                softplus(sign * z)
            })
            .sum::<f64>()
            / n
    }

    /// Full-batch backpropagation gradient of [`Self::mean_loss`].
    pub fn gradient(&self, rows: &[Vec<f64>], labels: &[f64]) -> MlpGradient {
        let n = rows.len() as f64;
        let hidden = self.b1.len();
        let inputs = self.w1[0].len();
        let mut g = MlpGradient {
            w1: vec![vec![0.0; inputs]; hidden],
            b1: vec![0.0; hidden],
            w2: vec![0.0; hidden],
            b2: 0.0,
        };
        let mut activations = vec![0.0; hidden];
        for (row, &y) in rows.iter().zip(labels) {
            let mut z = self.b2;
            for (unit, (w_row, b)) in self.w1.iter().zip(&self.b1).enumerate() {
                let pre: f64 = b + w_row.iter().zip(row).map(|(w, x)| w * x).sum::<f64>();
                let act = pre.max(0.0);
                activations[unit] = act;
                z += self.w2[unit] * act;
            }
            let residual = sigmoid(z) - y; // d loss / d z
            g.b2 += residual;
            for unit in 0..hidden {
                g.w2[unit] += residual * activations[unit];
                if activations[unit] > 0.0 {
                    let delta = residual * self.w2[unit];
                    g.b1[unit] += delta;
                    for (gw, &x) in g.w1[unit].iter_mut().zip(row) {
                        *gw += delta * x;
                    }
                }
            }
        }
        g.b2 /= n;
        for unit in 0..hidden {
            g.w2[unit] /= n;
            g.b1[unit] /= n;
            for gw in &mut g.w1[unit] {
                *gw /= n;
            }
        }
        g
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
    lr: f64,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(len: usize, lr: f64) -> Self {
        Adam {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
            lr,
        }
    }

    fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        self.t += 1;
        let bc1 = 1.0 - Self::BETA1.powi(self.t as i32);
        let bc2 = 1.0 - Self::BETA2.powi(self.t as i32);
        for ((p, &g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = Self::BETA1 * *m + (1.0 - Self::BETA1) * g;
            *v = Self::BETA2 * *v + (1.0 - Self::BETA2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= self.lr * m_hat / (v_hat.sqrt() + Self::EPS);
        }
    }
}

fn flatten(net: &MlpNetwork) -> Vec<f64> {
    let mut out = Vec::new();
    for row in &net.w1 {
        out.extend_from_slice(row);
    }
    out.extend_from_slice(&net.b1);
    out.extend_from_slice(&net.w2);
    out.push(net.b2);
    out
}

fn unflatten(flat: &[f64], hidden: usize, inputs: usize) -> MlpNetwork {
    let mut w1 = Vec::with_capacity(hidden);
    let mut i = 0;
    for _ in 0..hidden {
        w1.push(flat[i..i + inputs].to_vec());
        i += inputs;
    }
    let b1 = flat[i..i + hidden].to_vec();
    i += hidden;
    let w2 = flat[i..i + hidden].to_vec();
    i += hidden;
    MlpNetwork {
        w1,
        b1,
        w2,
        b2: flat[i],
    }
}

fn flatten_grad(g: &MlpGradient) -> Vec<f64> {
    let mut out = Vec::new();
    for row in &g.w1 {
        out.extend_from_slice(row);
    }
    out.extend_from_slice(&g.b1);
    out.extend_from_slice(&g.w2);
    out.push(g.b2);
    out
}

pub fn train_mlp(
    spec: &ModelSpec,
    params: &MlpParams,
    rows: &[Vec<f64>],
    labels: &[f64],
) -> Result<TrainedModel> {
    let scaler = fit_scaler(rows);
    let x = apply_scaler(&scaler, rows);
    let inputs = x[0].len();
    let net = MlpNetwork::new_seeded(inputs, params.hidden, seed::derive(spec.seed, "mlp/init"));
    let mut flat = flatten(&net);
    let mut adam = Adam::new(flat.len(), params.learning_rate);
    let keep = 1.0 - params.dropout;
    let mut loss_trace = Vec::with_capacity(params.epochs);
    let mut order: Vec<usize> = (0..x.len()).collect();

    for epoch in 0..params.epochs {
        let mut rng = seed::rng(seed::derive(spec.seed, &format!("mlp/epoch/{epoch}")));
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0.0;
        for batch in order.chunks(params.batch_size) {
            let net = unflatten(&flat, params.hidden, inputs);
            let batch_rows: Vec<Vec<f64>> = batch
                .iter()
                .map(|&r| {
                    x[r].iter()
                        .map(|&v| {
                            if params.dropout > 0.0 {
                                if rng.gen_bool(keep) {
                                    v / keep
                                } else {
                                    0.0
                                }
                            } else {
                                v
                            }
                        })
                        .collect()
                })
                .collect();
            let batch_labels: Vec<f64> = batch.iter().map(|&r| labels[r]).collect();
            let loss = net.mean_loss(&batch_rows, &batch_labels);
            if !loss.is_finite() {
                return Err(Error::NonFinite {
                    what: "loss".into(),
                    unit: "epoch".into(),
                    index: epoch,
                });
            }
            epoch_loss += loss;
            batches += 1.0;
            let grad = net.gradient(&batch_rows, &batch_labels);
            adam.step(&mut flat, &flatten_grad(&grad));
        }
        loss_trace.push(epoch_loss / batches);
    }

    let trained = unflatten(&flat, params.hidden, inputs);
    Ok(TrainedModel {
        spec: spec.clone(),
        n_features: inputs,
        scaler: Some(scaler),
        params: FittedParams::Nn {
            w1: trained.w1,
            b1: trained.b1,
            w2: trained.w2,
            b2: trained.b2,
        },
        meta: TrainMeta {
            loss_trace,
            seed: spec.seed,
        },
    })
}
