//! Confusion-matrix metrics. Positive class = VP. Zero-denominator
//! conventions: precision, recall, F1, and MCC fall to 0 so degenerate
//! folds stay total; Youden's J instead requires both classes in the
//! truth.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// Tally predictions at a threshold: probability >= threshold predicts VP.
pub fn confusion(y_true: &[bool], probs: &[f64], threshold: f64) -> Result<ConfusionMatrix> {
    if y_true.len() != probs.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: probs.len(),
        });
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Config(format!(
            "threshold {threshold} outside (0, 1)"
        )));
    }
    let mut cm = ConfusionMatrix {
        tp: 0,
        tn: 0,
        fp: 0,
        fn_: 0,
    };
    for (&truth, &p) in y_true.iter().zip(probs) {
        let predicted = p >= threshold;
        match (truth, predicted) {
            (true, true) => cm.tp += 1,
            (false, false) => cm.tn += 1,
            (false, true) => cm.fp += 1,
            (true, false) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

/// (accuracy, precision, recall, f1).
pub fn classification_metrics(cm: &ConfusionMatrix) -> (f64, f64, f64, f64) {
    let total = cm.total() as f64;
    let accuracy = if total == 0.0 {
        0.0
    } else {
        (cm.tp + cm.tn) as f64 / total
    };
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    (accuracy, precision, recall, f1)
}

fn ratio(num: u64, denom: u64) -> f64 {
    if denom == 0 {
        0.0
    } else {
        num as f64 / denom as f64
    }
}

/// Sensitivity + specificity - 1. Errors when the truth is single-class.
pub fn youdens_j(cm: &ConfusionMatrix) -> Result<f64> {
    if cm.tp + cm.fn_ == 0 || cm.tn + cm.fp == 0 {
        return Err(Error::SingleClass);
    }
    let sensitivity = cm.tp as f64 / (cm.tp + cm.fn_) as f64;
    let specificity = cm.tn as f64 / (cm.tn + cm.fp) as f64;
    Ok(sensitivity + specificity - 1.0)
}

/// Matthews correlation coefficient; 0 when any marginal is empty.
pub fn mcc(cm: &ConfusionMatrix) -> f64 {
    let (tp, tn, fp, fn_) = (cm.tp as f64, cm.tn as f64, cm.fp as f64, cm.fn_ as f64);
    let factors = [tp + fp, tp + fn_, tn + fp, tn + fn_];
    if factors.contains(&0.0) {
        return 0.0;
    }
    (tp * tn - fp * fn_) / factors.iter().product::<f64>().sqrt()
}

/// One fold's (or one model's) full metric set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub youdens_j: f64,
    pub mcc: f64,
    pub ece: f64,
    pub confusion: ConfusionMatrix,
    pub bins: Vec<super::ReliabilityBin>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn cm(tp: u64, fp: u64, fn_: u64, tn: u64) -> ConfusionMatrix {
        ConfusionMatrix { tp, tn, fp, fn_ }
    }

    #[test]
    fn perfect_predictions_have_empty_error_cells() {
        let y = vec![true, false, true];
        let p = vec![0.9, 0.1, 0.8];
        let c = confusion(&y, &p, 0.5).unwrap();
        assert_eq!(c, cm(2, 0, 0, 1));
        let (a, pr, rc, f1) = classification_metrics(&c);
        assert_eq!((a, pr, rc, f1), (1.0, 1.0, 1.0, 1.0));
        assert_eq!(youdens_j(&c).unwrap(), 1.0);
        assert_eq!(mcc(&c), 1.0);
    }

    #[test]
    fn threshold_is_inclusive() {
        let y = vec![true, false];
        let p = vec![0.5, 0.5];
        let c = confusion(&y, &p, 0.5).unwrap();
        // everything predicted VP under the >= rule
        assert_eq!(c, cm(1, 1, 0, 0));
    }

    #[test]
    fn nine_to_one_example() {
        let c = cm(9, 1, 1, 9);
        let (a, pr, rc, f1) = classification_metrics(&c);
        assert!((a - 0.9).abs() < 1e-15);
        assert!((pr - 0.9).abs() < 1e-15);
        assert!((rc - 0.9).abs() < 1e-15);
        assert!((f1 - 0.9).abs() < 1e-15);
        assert!((mcc(&c) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn zero_denominator_conventions() {
        let c = cm(0, 0, 5, 5);
        let (a, pr, rc, f1) = classification_metrics(&c);
        assert_eq!((pr, rc, f1), (0.0, 0.0, 0.0));
        assert!((a - 0.5).abs() < 1e-15);
        assert_eq!(mcc(&c), 0.0); // tp+fp == 0
    }

    #[test]
    fn youdens_j_values_and_errors() {
        let c = cm(8, 4, 2, 6);
        assert!((youdens_j(&c).unwrap() - 0.4).abs() < 1e-12);
        // coin-flip expectation: tp == fn_, tn == fp
        let flip = cm(5, 3, 5, 3);
        assert!(youdens_j(&flip).unwrap().abs() < 1e-12);
        let one_class = cm(0, 0, 0, 7);
        assert!(youdens_j(&one_class).is_err());
    }

    #[test]
    fn inverted_predictions_score_minus_one() {
        let c = cm(0, 5, 5, 0);
        assert_eq!(mcc(&c), -1.0);
    }

    #[test]
    fn confusion_matches_brute_force_tally_on_random_rows() {
        let mut rng = crate::seed::rng(606);
        let n = 1000;
        let y: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let c = confusion(&y, &p, 0.5).unwrap();
        let (mut tp, mut tn, mut fp, mut fn_) = (0u64, 0u64, 0u64, 0u64);
        for i in 0..n {
            let pred = p[i] >= 0.5;
            if y[i] && pred {
                tp += 1;
            } else if !y[i] && !pred {
                tn += 1;
            } else if !y[i] && pred {
                fp += 1;
            } else {
                fn_ += 1;
            }
        }
        assert_eq!(c, cm(tp, fp, fn_, tn));
        assert_eq!(c.total(), n as u64);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(confusion(&[true], &[0.5, 0.5], 0.5).is_err());
        assert!(confusion(&[true], &[0.5], 0.0).is_err());
    }
}
