//! Per-feature standardization fitted on training rows only.

use serde::{Deserialize, Serialize};

/// Column means and population standard deviations. A zero-variance column
/// keeps `std == 0` and passes through unscaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

/// Fit on training rows. Panics on empty input by contract of callers.
pub fn fit_scaler(rows: &[Vec<f64>]) -> Scaler {
    assert!(!rows.is_empty(), "scaler needs at least one row");
    let width = rows[0].len();
    let n = rows.len() as f64;
    let mut means = vec![0.0; width];
    for row in rows {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut vars = vec![0.0; width];
    for row in rows {
        for ((var, v), m) in vars.iter_mut().zip(row).zip(&means) {
            let d = v - m;
            *var += d * d;
        }
    }
    let stds = vars.iter().map(|v| (v / n).sqrt()).collect();
    Scaler { means, stds }
}

/// Affine per-column transform `(x - mean) / std`; zero-variance columns
/// are returned untouched.
pub fn apply_scaler(scaler: &Scaler, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|row| {
            row.iter()
                .zip(&scaler.means)
                .zip(&scaler.stds)
                .map(|((&x, &m), &s)| if s == 0.0 { x } else { (x - m) / s })
                .collect()
        })
        .collect()
}
