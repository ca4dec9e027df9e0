//! Hyperparameter-grid execution and Pareto-front screening.
//!
//! Candidates are compared on (minimize ECE, maximize MCC); an F1 floor
//! gates front membership. Dominance is evaluated over the full candidate
//! list and the floor filters membership afterwards, which keeps the front
//! monotone under a rising floor.

use crate::error::{Error, Result};
use crate::evalcal::{cross_validate, CvOptions, CvResult};
use crate::indicators::FeatureMatrix;
use crate::models::ModelSpec;
use crate::parallel;
use serde::{Deserialize, Serialize};

/// One grid entry with a stable identifier used in file names and reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEntry {
    pub id: String,
    pub spec: ModelSpec,
}

/// Cross-validated summary of one candidate configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateResult {
    pub id: String,
    pub spec: ModelSpec,
    pub cv: CvResult,
    /// (f1, mcc, ece) cross-validation means, duplicated for quick access.
    pub summary: CandidateSummary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateSummary {
    pub f1: f64,
    pub mcc: f64,
    pub ece: f64,
}

/// A grid entry that failed, with the reason; the rest of the grid is
/// unaffected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFailure {
    pub id: String,
    pub spec: ModelSpec,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub candidates: Vec<CandidateResult>,
    pub failures: Vec<GridFailure>,
}

/// Run every grid entry through cross-validation. Entries run in parallel
/// and results keep grid order. Errors only when every entry fails.
pub fn run_grid(
    grid: &[GridEntry],
    matrix: &FeatureMatrix,
    opts: &CvOptions,
) -> Result<GridReport> {
    if grid.is_empty() {
        return Err(Error::Config("empty model grid".into()));
    }
    let outcomes = parallel::map_slice(grid, |entry| {
        cross_validate(&entry.spec, matrix, opts).map(|cv| CandidateResult {
            id: entry.id.clone(),
            spec: entry.spec.clone(),
            summary: CandidateSummary {
                f1: cv.mean.f1,
                mcc: cv.mean.mcc,
                ece: cv.mean.ece,
            },
            cv,
        })
    });
    let mut report = GridReport {
        candidates: Vec::new(),
        failures: Vec::new(),
    };
    for (entry, outcome) in grid.iter().zip(outcomes) {
        match outcome {
            Ok(c) => report.candidates.push(c),
            Err(e) => report.failures.push(GridFailure {
                id: entry.id.clone(),
                spec: entry.spec.clone(),
                error: e.to_string(),
            }),
        }
    }
    if report.candidates.is_empty() {
        return Err(Error::Invalid(format!(
            "all {} grid entries failed; first error: {}",
            grid.len(),
            report.failures[0].error
        )));
    }
    Ok(report)
}

/// Does `a` dominate `b` on (ECE down, MCC up)?
pub fn dominates(a: &CandidateSummary, b: &CandidateSummary) -> bool {
    a.ece <= b.ece && a.mcc >= b.mcc && (a.ece < b.ece || a.mcc > b.mcc)
}

/// Non-dominated screening result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    /// Indices into the candidate list, ordered by (ece asc, mcc desc).
    pub members: Vec<usize>,
    pub f1_floor: f64,
    /// Set when the floor excluded every candidate.
    pub warning: Option<String>,
}

/// Compute the Pareto front: candidates not dominated by any other
/// candidate, restricted to those meeting the F1 floor.
pub fn pareto_front(candidates: &[CandidateResult], f1_floor: f64) -> Result<ParetoFront> {
    if candidates.is_empty() {
        return Err(Error::Invalid("no candidates to screen".into()));
    }
    let mut members: Vec<usize> = (0..candidates.len())
        .filter(|&i| {
            candidates[i].summary.f1 >= f1_floor
                && !candidates
                    .iter()
                    .enumerate()
                    .any(|(j, other)| j != i && dominates(&other.summary, &candidates[i].summary))
        })
        .collect();
    members.sort_by(|&a, &b| {
        let (sa, sb) = (&candidates[a].summary, &candidates[b].summary);
        sa.ece
            .partial_cmp(&sb.ece)
            .expect("finite ece")
            .then(sb.mcc.partial_cmp(&sa.mcc).expect("finite mcc"))
            .then(a.cmp(&b))
    });
    let warning = if members.is_empty() {
        Some(format!(
            "no candidate reaches the F1 floor {f1_floor}; front is empty"
        ))
    } else {
        None
    };
    Ok(ParetoFront {
        members,
        f1_floor,
        warning,
    })
}

/// How to pick one model off the front.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionPolicy {
    MinEce,
    MaxMcc,
    /// Maximize min-max-normalized (1 - ece') + mcc' over the front.
    Knee,
}

/// Pick a front member under the policy. Ties fall to the secondary
/// objective, then to front order. Errors on an empty front.
pub fn select_best<'a>(
    front: &ParetoFront,
    candidates: &'a [CandidateResult],
    policy: SelectionPolicy,
) -> Result<&'a CandidateResult> {
    if front.members.is_empty() {
        return Err(Error::Invalid(format!(
            "empty Pareto front (F1 floor {})",
            front.f1_floor
        )));
    }
    let summaries: Vec<&CandidateSummary> = front
        .members
        .iter()
        .map(|&i| &candidates[i].summary)
        .collect();
    // score per front member; the first strict maximum wins
    let scores: Vec<(f64, f64)> = match policy {
        SelectionPolicy::MinEce => summaries.iter().map(|s| (-s.ece, s.mcc)).collect(),
        SelectionPolicy::MaxMcc => summaries.iter().map(|s| (s.mcc, -s.ece)).collect(),
        SelectionPolicy::Knee => {
            let lo_hi = |f: fn(&CandidateSummary) -> f64| {
                let lo = summaries.iter().map(|s| f(s)).fold(f64::INFINITY, f64::min);
                let hi = summaries
                    .iter()
                    .map(|s| f(s))
                    .fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            };
            let (ece_lo, ece_hi) = lo_hi(|s| s.ece);
            let (mcc_lo, mcc_hi) = lo_hi(|s| s.mcc);
            let norm = |v: f64, lo: f64, hi: f64| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
            summaries
                .iter()
                .map(|s| {
                    (
                        (1.0 - norm(s.ece, ece_lo, ece_hi)) + norm(s.mcc, mcc_lo, mcc_hi),
                        0.0,
                    )
                })
                .collect()
        }
    };
    let mut best = 0;
    for i in 1..scores.len() {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    Ok(&candidates[front.members[best]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalcal::MetricSummary;
    use crate::models::{FamilyParams, LogisticParams};

    fn candidate(id: &str, ece: f64, mcc: f64, f1: f64) -> CandidateResult {
        let summary = CandidateSummary { f1, mcc, ece };
        let zero = MetricSummary {
            accuracy: 0.0,
            precision: 0.0,
            recall: 0.0,
            f1,
            youdens_j: 0.0,
            mcc,
            ece,
        };
        CandidateResult {
            id: id.to_string(),
            spec: ModelSpec {
                seed: 0,
                params: FamilyParams::Lr(LogisticParams::default()),
            },
            cv: CvResult {
                folds: vec![],
                mean: zero,
                std: zero,
                assignment: crate::evalcal::FoldAssignmentRef {
                    k: 2,
                    seed: 0,
                    assignment: vec![],
                },
                oof_probs: vec![],
                train_sizes: vec![],
                tomek_removed: vec![],
            },
            summary,
        }
    }

    /// Brute-force oracle: i is on the front iff it passes the floor and
    /// no other candidate dominates it.
    fn brute_force_front(candidates: &[CandidateResult], floor: f64) -> Vec<usize> {
        (0..candidates.len())
            .filter(|&i| {
                candidates[i].summary.f1 >= floor
                    && (0..candidates.len()).all(|j| {
                        j == i || !dominates(&candidates[j].summary, &candidates[i].summary)
                    })
            })
            .collect()
    }

    #[test]
    fn grid_isolates_failing_entries() {
        use crate::evalcal::{cross_validate, CvOptions};
        use crate::indicators::FeatureMatrix;
        use crate::models::ForestParams;

        let matrix = FeatureMatrix {
            feature_names: vec!["x".into()],
            patent_ids: (0..12).map(|i| format!("P{i:02}")).collect(),
            rows: (0..12).map(|i| vec![i as f64]).collect(),
            labels: (0..12).map(|i| i % 2 == 0).collect(),
        };
        let ok = GridEntry {
            id: "ok_rf".into(),
            spec: ModelSpec {
                seed: 1,
                params: FamilyParams::Rf(ForestParams {
                    n_trees: 3,
                    max_depth: 2,
                    min_leaf: 1,
                    features_per_split: None,
                }),
            },
        };
        let bad = GridEntry {
            id: "bad_rf".into(),
            spec: ModelSpec {
                seed: 1,
                params: FamilyParams::Rf(ForestParams {
                    n_trees: 3,
                    max_depth: 0, // invalid: rejected at training time
                    min_leaf: 1,
                    features_per_split: None,
                }),
            },
        };
        let opts = CvOptions {
            k: 2,
            seed: 0,
            resample: false,
            ..CvOptions::default()
        };
        let report = run_grid(&[bad.clone(), ok.clone()], &matrix, &opts).unwrap();
        assert_eq!(report.candidates.len(), 1);
        assert_eq!(report.candidates[0].id, "ok_rf");
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].id, "bad_rf");
        assert!(report.failures[0].error.contains("max_depth"));

        // a grid of one equals a direct cross_validate call
        let direct = cross_validate(&ok.spec, &matrix, &opts).unwrap();
        let single = run_grid(&[ok], &matrix, &opts).unwrap();
        assert_eq!(single.candidates.len(), 1);
        assert_eq!(single.candidates[0].summary.f1, direct.mean.f1);
        assert_eq!(single.candidates[0].summary.mcc, direct.mean.mcc);
        assert_eq!(single.candidates[0].summary.ece, direct.mean.ece);
        assert_eq!(single.candidates[0].cv, direct);

        // every entry failing is fatal
        let err = run_grid(&[bad], &matrix, &opts).unwrap_err();
        assert!(err.to_string().contains("failed"));
    }

    #[test]
    fn singleton_candidate_is_the_front() {
        let c = vec![candidate("a", 0.1, 0.5, 0.95)];
        let front = pareto_front(&c, 0.9).unwrap();
        assert_eq!(front.members, vec![0]);
        for policy in [
            SelectionPolicy::MinEce,
            SelectionPolicy::MaxMcc,
            SelectionPolicy::Knee,
        ] {
            assert_eq!(select_best(&front, &c, policy).unwrap().id, "a");
        }
    }

    #[test]
    fn three_candidate_example() {
        let c = vec![
            candidate("a", 0.1, 0.7, 0.95),
            candidate("b", 0.2, 0.6, 0.95),
            candidate("c", 0.15, 0.8, 0.95),
        ];
        let front = pareto_front(&c, 0.0).unwrap();
        // ordered by ece ascending
        assert_eq!(front.members, vec![0, 2]);
        // b is dominated by both a and c
        assert!(dominates(&c[0].summary, &c[1].summary));
        assert!(dominates(&c[2].summary, &c[1].summary));
        assert_eq!(
            select_best(&front, &c, SelectionPolicy::MinEce).unwrap().id,
            "a"
        );
        assert_eq!(
            select_best(&front, &c, SelectionPolicy::MaxMcc).unwrap().id,
            "c"
        );
        // knee: a scores (1-0) + 0 = 1, c scores (1-1) + 1 = 1; tie keeps
        // the earlier front member
        assert_eq!(
            select_best(&front, &c, SelectionPolicy::Knee).unwrap().id,
            "a"
        );
    }

    #[test]
    fn identical_summaries_share_the_front() {
        let c = vec![
            candidate("a", 0.1, 0.7, 0.95),
            candidate("b", 0.1, 0.7, 0.95),
        ];
        let front = pareto_front(&c, 0.0).unwrap();
        assert_eq!(front.members, vec![0, 1]);
    }

    #[test]
    fn floor_excludes_and_warns() {
        let c = vec![candidate("a", 0.1, 0.7, 0.5)];
        let front = pareto_front(&c, 0.9).unwrap();
        assert!(front.members.is_empty());
        assert!(front.warning.is_some());
        assert!(select_best(&front, &c, SelectionPolicy::MinEce).is_err());
    }

    #[test]
    fn random_fronts_match_brute_force_and_floor_is_monotone() {
        use rand::Rng;
        let mut rng = crate::seed::rng(808);
        for _ in 0..50 {
            let n = rng.gen_range(1..60);
            let c: Vec<CandidateResult> = (0..n)
                .map(|i| {
                    candidate(
                        &format!("c{i}"),
                        rng.gen_range(0.0..0.5),
                        rng.gen_range(-0.2..1.0),
                        rng.gen_range(0.5..1.0),
                    )
                })
                .collect();
            let floor = rng.gen_range(0.4..1.0);
            let front = pareto_front(&c, floor).unwrap();
            let mut sorted_members = front.members.clone();
            sorted_members.sort_unstable();
            assert_eq!(sorted_members, brute_force_front(&c, floor));

            // every non-member is floor-excluded or dominated by someone
            for i in 0..c.len() {
                if front.members.contains(&i) {
                    continue;
                }
                let excluded = c[i].summary.f1 < floor;
                let dominated = (0..c.len())
                    .any(|j| j != i && dominates(&c[j].summary, &c[i].summary));
                assert!(excluded || dominated, "candidate {i} unaccounted for");
            }

            let higher = pareto_front(&c, floor + 0.05).unwrap();
            for m in &higher.members {
                assert!(front.members.contains(m), "raising the floor added {m}");
            }
        }
    }

    #[test]
    fn knee_matches_enumeration() {
        let c = vec![
            candidate("a", 0.10, 0.70, 0.95),
            candidate("b", 0.15, 0.80, 0.95),
            candidate("c", 0.12, 0.78, 0.95),
        ];
        let front = pareto_front(&c, 0.0).unwrap();
        // enumerate normalized scores by hand
        let members = &front.members;
        let ece: Vec<f64> = members.iter().map(|&i| c[i].summary.ece).collect();
        let mcc: Vec<f64> = members.iter().map(|&i| c[i].summary.mcc).collect();
        let (elo, ehi) = (
            ece.iter().cloned().fold(f64::INFINITY, f64::min),
            ece.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        );
        let (mlo, mhi) = (
            mcc.iter().cloned().fold(f64::INFINITY, f64::min),
            mcc.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        );
        let mut best = (f64::NEG_INFINITY, 0usize);
        for (pos, &m) in members.iter().enumerate() {
            let s = (1.0 - (ece[pos] - elo) / (ehi - elo)) + (mcc[pos] - mlo) / (mhi - mlo);
            if s > best.0 {
                best = (s, m);
            }
        }
        let picked = select_best(&front, &c, SelectionPolicy::Knee).unwrap();
        assert_eq!(picked.id, c[best.1].id);
    }
}
