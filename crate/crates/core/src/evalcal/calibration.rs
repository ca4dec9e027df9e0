//! Reliability bins and expected calibration error. Confidence is the
//! positive-class probability; accuracy per bin is the fraction of
//! positives, matching reliability-diagram axes.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// One equal-width probability bin. Bins are right-closed except the
/// first, which includes 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub mean_confidence: f64,
    pub positive_fraction: f64,
}

/// Group predictions into `m_bins` equal-width bins over [0, 1].
pub fn reliability_bins(
    y_true: &[bool],
    probs: &[f64],
    m_bins: usize,
) -> Result<Vec<ReliabilityBin>> {
    if m_bins == 0 {
        return Err(Error::Config("m_bins must be at least 1".into()));
    }
    if y_true.len() != probs.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: probs.len(),
        });
    }
    for &p in probs {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Invalid(format!("probability {p} outside [0, 1]")));
        }
    }
    let m = m_bins as f64;
    let mut counts = vec![0usize; m_bins];
    let mut conf_sums = vec![0.0; m_bins];
    let mut pos_counts = vec![0usize; m_bins];
    for (&truth, &p) in y_true.iter().zip(probs) {
        // right-closed bins: (i/m, (i+1)/m], first bin includes 0
        let slot = if p == 0.0 {
            0
        } else {
            ((p * m).ceil() as usize - 1).min(m_bins - 1)
        };
        counts[slot] += 1;
        conf_sums[slot] += p;
        pos_counts[slot] += usize::from(truth);
    }
    Ok((0..m_bins)
        .map(|i| ReliabilityBin {
            lower: i as f64 / m,
            upper: (i + 1) as f64 / m,
            count: counts[i],
            mean_confidence: if counts[i] == 0 {
                0.0
            } else {
                conf_sums[i] / counts[i] as f64
            },
            positive_fraction: if counts[i] == 0 {
                0.0
            } else {
                pos_counts[i] as f64 / counts[i] as f64
            },
        })
        .collect())
}

/// Expected calibration error: bin-weighted mean absolute gap between
/// positive fraction and mean confidence. 0 for an empty population.
pub fn ece(bins: &[ReliabilityBin]) -> f64 {
    let n: usize = bins.iter().map(|b| b.count).sum();
    if n == 0 {
        return 0.0;
    }
    bins.iter()
        .map(|b| {
            b.count as f64 / n as f64 * (b.positive_fraction - b.mean_confidence).abs()
        })
        .sum()
}

/// Reliability bins as CSV for external plotting.
pub fn write_bins_csv<W: Write>(bins: &[ReliabilityBin], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lower", "upper", "count", "mean_confidence", "positive_fraction"])
        .map_err(|e| Error::Invalid(format!("bins csv: {e}")))?;
    for b in bins {
        w.write_record(&[
            format!("{}", b.lower),
            format!("{}", b.upper),
            format!("{}", b.count),
            format!("{}", b.mean_confidence),
            format!("{}", b.positive_fraction),
        ])
        .map_err(|e| Error::Invalid(format!("bins csv: {e}")))?;
    }
    w.flush().map_err(|e| Error::io("<bins csv>", e))?;
    Ok(())
}
