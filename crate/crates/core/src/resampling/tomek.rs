//! Tomek links: opposite-class pairs that are mutual nearest neighbors.
//! Removing the majority member of every link cleans the class boundary
//! without touching minority rows.

use crate::error::{Error, Result};
use crate::parallel;
use serde::Serialize;

/// Distance used for the nearest-neighbor search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceMetric {
    Euclidean,
}

/// Audit record of one undersampling pass.
#[derive(Debug, Clone, Serialize)]
pub struct TomekReport {
    /// (minority row, majority row) pairs.
    pub links: Vec<(usize, usize)>,
    /// Majority rows removed, ascending, deduplicated.
    pub removed: Vec<usize>,
    pub distance_metric: DistanceMetric,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest other row; ties go to the lowest row index.
fn nearest_neighbor(rows: &[Vec<f64>], i: usize) -> usize {
    let mut best = usize::MAX;
    let mut best_d = f64::INFINITY;
    for (j, row) in rows.iter().enumerate() {
        if j == i {
            continue;
        }
        let d = squared_distance(&rows[i], row);
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    best
}

/// Which label is the majority class. Ties fall to the positive (VP)
/// class so the result never depends on row order.
fn majority_label(labels: &[bool]) -> bool {
    let positives = labels.iter().filter(|&&l| l).count();
    positives * 2 >= labels.len()
}

fn check_inputs(rows: &[Vec<f64>], labels: &[bool]) -> Result<()> {
    if rows.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: rows.len(),
            right: labels.len(),
        });
    }
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::SingleClass);
    }
    for i in 0..rows.len() {
        for j in (i + 1)..rows.len() {
            if labels[i] != labels[j] && squared_distance(&rows[i], &rows[j]) == 0.0 {
                return Err(Error::DegenerateRows { a: i, b: j });
            }
        }
    }
    Ok(())
}

/// All opposite-class mutual-nearest-neighbor pairs, each reported as
/// (minority row, majority row).
pub fn find_tomek_links(
    rows: &[Vec<f64>],
    labels: &[bool],
    metric: DistanceMetric,
) -> Result<TomekReport> {
    let DistanceMetric::Euclidean = metric;
    check_inputs(rows, labels)?;
    let majority = majority_label(labels);

    let neighbors = parallel::map_range(rows.len(), |i| nearest_neighbor(rows, i));

    let mut links = Vec::new();
    for a in 0..rows.len() {
        let b = neighbors[a];
        if a < b && neighbors[b] == a && labels[a] != labels[b] {
            let (minority_row, majority_row) = if labels[a] == majority { (b, a) } else { (a, b) };
            links.push((minority_row, majority_row));
        }
    }
    links.sort_unstable();

    let mut removed: Vec<usize> = links.iter().map(|&(_, maj)| maj).collect();
    removed.sort_unstable();
    removed.dedup();

    Ok(TomekReport {
        links,
        removed,
        distance_metric: metric,
    })
}

/// One undersampling pass: drop the majority member of every link. Row
/// identity of survivors is preserved (original order, original values).
pub fn undersample(
    rows: &[Vec<f64>],
    labels: &[bool],
) -> Result<(Vec<Vec<f64>>, Vec<bool>, TomekReport)> {
    let report = find_tomek_links(rows, labels, DistanceMetric::Euclidean)?;
    let mut keep = vec![true; rows.len()];
    for &r in &report.removed {
        keep[r] = false;
    }
    let kept_rows: Vec<Vec<f64>> = rows
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(r, _)| r.clone())
        .collect();
    let kept_labels: Vec<bool> = labels
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(&l, _)| l)
        .collect();
    Ok((kept_rows, kept_labels, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn rows_1d(xs: &[f64]) -> Vec<Vec<f64>> {
        xs.iter().map(|&x| vec![x]).collect()
    }

    /// Independent O(n^2) oracle: recompute every nearest neighbor by full
    /// scan and enumerate mutual pairs.
    fn brute_force_links(rows: &[Vec<f64>], labels: &[bool]) -> Vec<(usize, usize)> {
        let n = rows.len();
        let nn: Vec<usize> = (0..n)
            .map(|i| {
                let mut best = usize::MAX;
                let mut best_d = f64::INFINITY;
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let d: f64 = rows[i]
                        .iter()
                        .zip(&rows[j])
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    if d < best_d {
                        best_d = d;
                        best = j;
                    }
                }
                best
            })
            .collect();
        let positives = labels.iter().filter(|&&l| l).count();
        let majority = positives * 2 >= n;
        let mut out = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                if labels[a] != labels[b] && nn[a] == b && nn[b] == a {
                    let pair = if labels[a] == majority { (b, a) } else { (a, b) };
                    out.push(pair);
                }
            }
        }
        out.sort_unstable();
        out
    }

    #[test]
    fn well_separated_clusters_have_no_links() {
        let rows = rows_1d(&[0.0, 0.1, 5.0, 5.1]);
        let labels = vec![false, false, true, true];
        let report = find_tomek_links(&rows, &labels, DistanceMetric::Euclidean).unwrap();
        assert!(report.links.is_empty());
        let (x2, y2, _) = undersample(&rows, &labels).unwrap();
        assert_eq!(x2, rows);
        assert_eq!(y2, labels);
    }

    #[test]
    fn boundary_pair_forms_exactly_one_link() {
        // NVP at {0.0, 0.9}, VP at {1.0, 5.0}: 0.9 and 1.0 are mutual NNs.
        let rows = rows_1d(&[0.0, 0.9, 1.0, 5.0]);
        let labels = vec![false, false, true, true];
        let report = find_tomek_links(&rows, &labels, DistanceMetric::Euclidean).unwrap();
        assert_eq!(brute_force_links(&rows, &labels), vec![(1, 2)]);
        assert_eq!(report.links, vec![(1, 2)]);
        assert_eq!(report.removed, vec![2]);
    }

    #[test]
    fn majority_member_is_removed() {
        // VP is the strict majority; the boundary VP row must go.
        let rows = rows_1d(&[0.0, 0.9, 1.0, 5.0, 6.0]);
        let labels = vec![false, false, true, true, true];
        let (x2, y2, report) = undersample(&rows, &labels).unwrap();
        assert_eq!(report.links, vec![(1, 2)]);
        assert_eq!(report.removed, vec![2]);
        assert_eq!(x2.len(), 4);
        assert!(!x2.contains(&vec![1.0]));
        // minority count unchanged
        assert_eq!(y2.iter().filter(|&&l| !l).count(), 2);
    }

    #[test]
    fn single_class_and_duplicate_rows_error() {
        let rows = rows_1d(&[0.0, 1.0]);
        assert!(matches!(
            find_tomek_links(&rows, &[true, true], DistanceMetric::Euclidean),
            Err(Error::SingleClass)
        ));
        let dup = rows_1d(&[0.5, 0.5]);
        assert!(matches!(
            find_tomek_links(&dup, &[true, false], DistanceMetric::Euclidean),
            Err(Error::DegenerateRows { .. })
        ));
    }

    #[test]
    fn random_fixtures_match_brute_force() {
        let mut rng = crate::seed::rng(90210);
        for case in 0..30 {
            let n = rng.gen_range(6..40);
            let d = rng.gen_range(1..4);
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .collect();
            let mut labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
            labels[0] = true;
            labels[1] = false;
            let report = find_tomek_links(&rows, &labels, DistanceMetric::Euclidean).unwrap();
            assert_eq!(
                report.links,
                brute_force_links(&rows, &labels),
                "case {case}"
            );
            // removed set == majority members of the oracle link set
            let mut expected_removed: Vec<usize> =
                report.links.iter().map(|&(_, maj)| maj).collect();
            expected_removed.sort_unstable();
            expected_removed.dedup();
            assert_eq!(report.removed, expected_removed);
        }
    }

    #[test]
    fn minority_rows_never_removed() {
        let mut rng = crate::seed::rng(5150);
        for _ in 0..20 {
            let n = rng.gen_range(8..50);
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
                .collect();
            let mut labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.7)).collect();
            labels[0] = true;
            labels[1] = false;
            let positives = labels.iter().filter(|&&l| l).count();
            let majority = positives * 2 >= n;
            let (_, y2, report) = undersample(&rows, &labels).unwrap();
            for &r in &report.removed {
                assert_eq!(labels[r], majority);
            }
            let minority_before = labels.iter().filter(|&&l| l != majority).count();
            let minority_after = y2.iter().filter(|&&l| l != majority).count();
            assert_eq!(minority_before, minority_after);
        }
    }
}
