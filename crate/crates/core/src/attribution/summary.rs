//! Global and confidence-binned attribution summaries.

use super::Attribution;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Per-feature statistics within one group of attributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStat {
    pub feature: String,
    pub mean_abs_phi: f64,
    /// Pearson correlation between the feature value and its phi across
    /// the group; 0 when either side is constant.
    pub value_phi_correlation: f64,
}

/// Feature ranking for one confidence bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSummary {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub empty: bool,
    /// Sorted by mean |phi| descending, ties by feature index.
    pub ranking: Vec<FeatureStat>,
}

/// Global ranking plus per-instance plot points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalSummary {
    pub ranking: Vec<FeatureStat>,
    /// (feature, value percentile within the set, phi) per instance, in
    /// ranking order then instance order; the summary-plot data.
    pub points: Vec<(String, f64, f64)>,
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / (vx * vy).sqrt()
    }
}

fn ranked_stats(
    feature_names: &[String],
    rows: &[&Attribution],
    values: &[Vec<f64>],
) -> Vec<FeatureStat> {
    let m = feature_names.len();
    let mut stats: Vec<(usize, FeatureStat)> = (0..m)
        .map(|j| {
            let phis: Vec<f64> = rows.iter().map(|a| a.phi[j]).collect();
            let vals: Vec<f64> = values.iter().map(|v| v[j]).collect();
            let mean_abs = if phis.is_empty() {
                0.0
            } else {
                phis.iter().map(|p| p.abs()).sum::<f64>() / phis.len() as f64
            };
            (
                j,
                FeatureStat {
                    feature: feature_names[j].clone(),
                    mean_abs_phi: mean_abs,
                    value_phi_correlation: pearson(&vals, &phis),
                },
            )
        })
        .collect();
    stats.sort_by(|(ia, a), (ib, b)| {
        b.mean_abs_phi
            .partial_cmp(&a.mean_abs_phi)
            .expect("finite phi")
            .then(ia.cmp(ib))
    });
    stats.into_iter().map(|(_, s)| s).collect()
}

/// Group attributions into confidence bins (right-closed, first bin
/// includes 0) and rank features inside each bin. `values` are the feature
/// rows aligned 1:1 with `attributions`.
pub fn bin_attributions(
    attributions: &[Attribution],
    values: &[Vec<f64>],
    feature_names: &[String],
    bin_edges: &[f64],
) -> Result<Vec<BinSummary>> {
    if attributions.len() != values.len() {
        return Err(Error::LengthMismatch {
            left: attributions.len(),
            right: values.len(),
        });
    }
    if bin_edges.len() < 2
        || bin_edges.first() != Some(&0.0)
        || bin_edges.last() != Some(&1.0)
        || bin_edges.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::Config(
            "bin_edges must rise strictly from 0 to 1".into(),
        ));
    }
    let n_bins = bin_edges.len() - 1;
    let mut grouped: Vec<Vec<usize>> = vec![Vec::new(); n_bins];
    for (i, a) in attributions.iter().enumerate() {
        let c = a.confidence;
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::Invalid(format!("confidence {c} outside [0, 1]")));
        }
        let mut slot = n_bins - 1;
        for b in 0..n_bins {
            // right-closed bins, first includes 0
            let lower_ok = if b == 0 { c >= bin_edges[0] } else { c > bin_edges[b] };
            if lower_ok && c <= bin_edges[b + 1] {
                slot = b;
                break;
            }
        }
        grouped[slot].push(i);
    }

    Ok((0..n_bins)
        .map(|b| {
            let rows: Vec<&Attribution> = grouped[b].iter().map(|&i| &attributions[i]).collect();
            let vals: Vec<Vec<f64>> = grouped[b].iter().map(|&i| values[i].clone()).collect();
            let ranking = if rows.is_empty() {
                Vec::new()
            } else {
                ranked_stats(feature_names, &rows, &vals)
            };
            BinSummary {
                lower: bin_edges[b],
                upper: bin_edges[b + 1],
                count: rows.len(),
                empty: rows.is_empty(),
                ranking,
            }
        })
        .collect())
}

/// Rank features over the whole attribution set and emit plot points.
pub fn global_summary(
    attributions: &[Attribution],
    values: &[Vec<f64>],
    feature_names: &[String],
) -> Result<GlobalSummary> {
    if attributions.is_empty() {
        return Err(Error::Invalid("no attributions to summarize".into()));
    }
    if attributions.len() != values.len() {
        return Err(Error::LengthMismatch {
            left: attributions.len(),
            right: values.len(),
        });
    }
    let rows: Vec<&Attribution> = attributions.iter().collect();
    let ranking = ranked_stats(feature_names, &rows, values);

    // percentile of each feature value within the set (mid-rank)
    let n = attributions.len();
    let mut points = Vec::with_capacity(n * feature_names.len());
    for stat in &ranking {
        let j = feature_names
            .iter()
            .position(|f| f == &stat.feature)
            .expect("ranking features come from feature_names");
        let mut sorted: Vec<f64> = values.iter().map(|v| v[j]).collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        for (i, a) in attributions.iter().enumerate() {
            let v = values[i][j];
            let below = sorted.partition_point(|&s| s < v);
            let through = sorted.partition_point(|&s| s <= v);
            let percentile = (below as f64 + (through - below) as f64 / 2.0) / n as f64;
            points.push((stat.feature.clone(), percentile, a.phi[j]));
        }
    }
    Ok(GlobalSummary { ranking, points })
}

/// Per-instance attribution CSV: patent_id, confidence, base value, then
/// one phi column per feature.
pub fn write_attributions_csv<W: Write>(
    attributions: &[Attribution],
    feature_names: &[String],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["patent_id".to_string(), "confidence".into(), "phi_0".into()];
    header.extend(feature_names.iter().map(|f| format!("phi_{f}")));
    w.write_record(&header)
        .map_err(|e| Error::Invalid(format!("attribution csv: {e}")))?;
    for a in attributions {
        let mut rec = vec![
            a.patent_id.clone(),
            format!("{}", a.confidence),
            format!("{}", a.base_value),
        ];
        rec.extend(a.phi.iter().map(|p| format!("{p}")));
        w.write_record(&rec)
            .map_err(|e| Error::Invalid(format!("attribution csv: {e}")))?;
    }
    w.flush().map_err(|e| Error::io("<attribution csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn attribution(id: &str, confidence: f64, phi: Vec<f64>) -> Attribution {
        Attribution {
            patent_id: id.to_string(),
            base_value: 0.5,
            model_output: confidence,
            confidence,
            phi,
        }
    }

    fn names() -> Vec<String> {
        vec!["f0".into(), "f1".into(), "f2".into()]
    }

    #[test]
    fn all_high_confidences_fill_only_the_top_bin() {
        let atts: Vec<Attribution> = (0..4)
            .map(|i| attribution(&format!("p{i}"), 0.9, vec![0.1, 0.2, 0.0]))
            .collect();
        let values = vec![vec![1.0, 2.0, 3.0]; 4];
        let edges = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
        let bins = bin_attributions(&atts, &values, &names(), &edges).unwrap();
        assert_eq!(bins.len(), 5);
        assert_eq!(bins[4].count, 4);
        assert!(!bins[4].empty);
        assert!(bins[..4].iter().all(|b| b.empty));
    }

    #[test]
    fn zero_phi_feature_ranks_last() {
        let atts = vec![
            attribution("a", 0.9, vec![0.0, 0.5, 0.1]),
            attribution("b", 0.95, vec![0.0, 0.3, 0.2]),
        ];
        let values = vec![vec![1.0, 2.0, 3.0], vec![2.0, 1.0, 0.0]];
        let edges = [0.0, 0.5, 1.0];
        let bins = bin_attributions(&atts, &values, &names(), &edges).unwrap();
        let ranking = &bins[1].ranking;
        assert_eq!(ranking.last().unwrap().feature, "f0");
        assert_eq!(ranking.last().unwrap().mean_abs_phi, 0.0);
    }

    #[test]
    fn bin_rankings_match_brute_force_grouping() {
        use rand::Rng;
        let mut rng = crate::seed::rng(404);
        let m = 3;
        let atts: Vec<Attribution> = (0..100)
            .map(|i| {
                attribution(
                    &format!("p{i:03}"),
                    rng.gen_range(0.0..=1.0),
                    (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                )
            })
            .collect();
        let values: Vec<Vec<f64>> = (0..100)
            .map(|_| (0..m).map(|_| rng.gen_range(-5.0..5.0)).collect())
            .collect();
        let edges = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
        let bins = bin_attributions(&atts, &values, &names(), &edges).unwrap();

        for (b, bin) in bins.iter().enumerate() {
            // brute-force membership
            let members: Vec<usize> = (0..atts.len())
                .filter(|&i| {
                    let c = atts[i].confidence;
                    let lo_ok = if b == 0 { c >= 0.0 } else { c > edges[b] };
                    lo_ok && c <= edges[b + 1]
                })
                .collect();
            assert_eq!(bin.count, members.len(), "bin {b}");
            if members.is_empty() {
                continue;
            }
            // brute-force mean |phi| ranking
            let mut expected: Vec<(usize, f64)> = (0..m)
                .map(|j| {
                    let mean = members.iter().map(|&i| atts[i].phi[j].abs()).sum::<f64>()
                        / members.len() as f64;
                    (j, mean)
                })
                .collect();
            expected.sort_by(|(ia, a), (ib, b)| {
                b.partial_cmp(a).unwrap().then(ia.cmp(ib))
            });
            let got: Vec<&str> = bin.ranking.iter().map(|s| s.feature.as_str()).collect();
            let want: Vec<String> = expected.iter().map(|(j, _)| format!("f{j}")).collect();
            assert_eq!(got, want.iter().map(String::as_str).collect::<Vec<_>>());
        }
        let total: usize = bins.iter().map(|b| b.count).sum();
        assert_eq!(total, atts.len());
    }

    #[test]
    fn global_ranking_two_instances_hand_sorted() {
        let atts = vec![
            attribution("a", 0.2, vec![0.1, -0.4, 0.0]),
            attribution("b", 0.8, vec![0.3, 0.2, 0.0]),
        ];
        let values = vec![vec![1.0, 0.0, 5.0], vec![2.0, 1.0, 5.0]];
        let g = global_summary(&atts, &values, &names()).unwrap();
        // mean |phi|: f0 = 0.2, f1 = 0.3, f2 = 0.0
        let order: Vec<&str> = g.ranking.iter().map(|s| s.feature.as_str()).collect();
        assert_eq!(order, vec!["f1", "f0", "f2"]);
        assert_eq!(g.points.len(), 6);
    }

    #[test]
    fn constant_model_ranks_all_tied_at_zero() {
        let atts = vec![
            attribution("a", 0.5, vec![0.0, 0.0, 0.0]),
            attribution("b", 0.5, vec![0.0, 0.0, 0.0]),
        ];
        let values = vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]];
        let g = global_summary(&atts, &values, &names()).unwrap();
        assert!(g.ranking.iter().all(|s| s.mean_abs_phi == 0.0));
        // ties keep feature order
        let order: Vec<&str> = g.ranking.iter().map(|s| s.feature.as_str()).collect();
        assert_eq!(order, vec!["f0", "f1", "f2"]);
    }
}
