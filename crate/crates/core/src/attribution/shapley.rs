//! Exact (subset-enumerating) and permutation-sampled Shapley values.

use crate::error::{Error, Result};
use crate::parallel;
use crate::seed;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

/// Batch prediction interface; implemented by trained models and by plain
/// closures in tests.
pub trait Predictor: Sync {
    fn predict(&self, rows: &[Vec<f64>]) -> Vec<f64>;
}

/// Reference rows the interventional expectation averages over. Drawn from
/// training data only.
#[derive(Debug, Clone)]
pub struct BackgroundSet {
    rows: Vec<Vec<f64>>,
}

impl BackgroundSet {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Invalid("background set must not be empty".into()));
        }
        let width = rows[0].len();
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::Invalid("ragged background rows".into()));
        }
        Ok(BackgroundSet { rows })
    }

    /// Sample `size` training rows uniformly (with a fixed seed) when the
    /// pool is larger than the budget.
    pub fn sampled(pool: &[Vec<f64>], size: usize, seed_value: u64) -> Result<Self> {
        if pool.is_empty() {
            return Err(Error::Invalid("background pool is empty".into()));
        }
        if pool.len() <= size {
            return Self::new(pool.to_vec());
        }
        let mut rng = seed::rng(seed::derive(seed_value, "background"));
        let mut idx: Vec<usize> = (0..pool.len()).collect();
        idx.shuffle(&mut rng);
        idx.truncate(size);
        idx.sort_unstable();
        Self::new(idx.into_iter().map(|i| pool[i].clone()).collect())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// Per-instance attribution: base value plus one contribution per feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub patent_id: String,
    /// Mean model output over the raw background.
    pub base_value: f64,
    pub phi: Vec<f64>,
    /// Model output on the explained row.
    pub model_output: f64,
    /// Predicted positive-class probability used for binning.
    pub confidence: f64,
}

/// Mean model output over the background with the features in `mask`
/// replaced by `x`'s values.
fn coalition_value<P: Predictor>(
    model: &P,
    x: &[f64],
    background: &BackgroundSet,
    mask: u32,
) -> f64 {
    let rows: Vec<Vec<f64>> = background
        .rows()
        .iter()
        .map(|b| {
            b.iter()
                .enumerate()
                .map(|(j, &bv)| if mask & (1 << j) != 0 { x[j] } else { bv })
                .collect()
        })
        .collect();
    let preds = model.predict(&rows);
    preds.iter().sum::<f64>() / preds.len() as f64
}

/// Exact Shapley values by full subset enumeration: cost `2^M * B` model
/// rows. Errors when the feature count exceeds `max_features`.
pub fn exact_shapley<P: Predictor>(
    model: &P,
    patent_id: &str,
    x: &[f64],
    background: &BackgroundSet,
    max_features: usize,
) -> Result<Attribution> {
    let m = x.len();
    if m > max_features {
        return Err(Error::ExactShapleyBudget(m, max_features));
    }
    if m > 31 {
        return Err(Error::ExactShapleyBudget(m, 31));
    }
    if background.width() != m {
        return Err(Error::WidthMismatch {
            expected: m,
            actual: background.width(),
        });
    }

    let n_masks = 1usize << m;
    // value of every coalition, computed in parallel, indexed by mask
    let values = parallel::map_range(n_masks, |mask| {
        coalition_value(model, x, background, mask as u32)
    });

    // factorial weights |S|! (M - |S| - 1)! / M!
    let mut factorial = vec![1.0; m + 1];
    for i in 1..=m {
        factorial[i] = factorial[i - 1] * i as f64;
    }
    let weight = |s: usize| factorial[s] * factorial[m - s - 1] / factorial[m];

    let phi: Vec<f64> = (0..m)
        .map(|i| {
            let bit = 1usize << i;
            let mut total = 0.0;
            for mask in 0..n_masks {
                if mask & bit != 0 {
                    continue;
                }
                let s = (mask as u32).count_ones() as usize;
                total += weight(s) * (values[mask | bit] - values[mask]);
            }
            total
        })
        .collect();

    let model_output = model.predict(&[x.to_vec()])[0];
    Ok(Attribution {
        patent_id: patent_id.to_string(),
        base_value: values[0],
        phi,
        model_output,
        confidence: model_output,
    })
}

/// Monte Carlo Shapley over random feature orderings. For each permutation
/// the explained row's features are switched on one at a time against
/// every background row; the telescoping sum keeps efficiency exact up to
/// float rounding. Deterministic for a fixed seed.
pub fn sampled_shapley<P: Predictor>(
    model: &P,
    patent_id: &str,
    x: &[f64],
    background: &BackgroundSet,
    n_permutations: usize,
    seed_value: u64,
) -> Result<Attribution> {
    let m = x.len();
    if n_permutations == 0 {
        return Err(Error::Config("n_permutations must be at least 1".into()));
    }
    if background.width() != m {
        return Err(Error::WidthMismatch {
            expected: m,
            actual: background.width(),
        });
    }

    // per-permutation contribution vectors, order-stable reduction
    let contributions = parallel::map_range(n_permutations, |p| {
        let mut rng = seed::rng(seed::derive(seed_value, &format!("perm/{p}")));
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(&mut rng);

        // walk all background rows through the permutation: rows[b] starts
        // as the background row and has features switched to x's values
        let mut rows: Vec<Vec<f64>> = background.rows().to_vec();
        let mut prev: Vec<f64> = model.predict(&rows);
        let mut phi = vec![0.0; m];
        for &feature in &order {
            for row in &mut rows {
                row[feature] = x[feature];
            }
            let next = model.predict(&rows);
            let marginal: f64 = next
                .iter()
                .zip(&prev)
                .map(|(n, p)| n - p)
                .sum::<f64>()
                / next.len() as f64;
            phi[feature] += marginal;
            prev = next;
        }
        phi
    });

    let mut phi = vec![0.0; m];
    for contribution in &contributions {
        for (acc, c) in phi.iter_mut().zip(contribution) {
            *acc += c;
        }
    }
    for acc in &mut phi {
        *acc /= n_permutations as f64;
    }

    let base_value = {
        let preds = model.predict(background.rows());
        preds.iter().sum::<f64>() / preds.len() as f64
    };
    let model_output = model.predict(&[x.to_vec()])[0];
    Ok(Attribution {
        patent_id: patent_id.to_string(),
        base_value,
        phi,
        model_output,
        confidence: model_output,
    })
}
