//! The shipped 5-patent golden corpus: every one of the 50 indicators must
//! match the frozen hand-computed matrix, integers exactly and ratios
//! within 1e-9.

use patval::corpus::{
    build_index, derive_label, emit_canonical, parse_corpus, CorpusFormat, IpcLevel, Label,
    LabelPolicy,
};
use patval::indicators::{
    compute_all, read_matrix_csv, technology_breadth, FieldConfig, FEATURE_NAMES,
};
use std::path::PathBuf;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn load_corpus() -> Vec<patval::corpus::PatentRecord> {
    let outcome = parse_corpus(&data("golden_corpus.jsonl"), CorpusFormat::Jsonl, true)
        .expect("golden corpus parses strictly");
    assert!(outcome.diagnostics.is_empty());
    assert_eq!(outcome.records.len(), 5);
    outcome.records
}

#[test]
fn labels_partition_the_golden_corpus() {
    let corpus = load_corpus();
    let policy = LabelPolicy::default();
    let labels: Vec<(String, Label)> = corpus
        .iter()
        .map(|r| (r.patent_id.clone(), derive_label(r, policy)))
        .collect();
    let count = |want: Label| labels.iter().filter(|(_, l)| *l == want).count();
    assert_eq!(count(Label::Vp), 2);
    assert_eq!(count(Label::Nvp), 2);
    assert_eq!(count(Label::Excluded), 1);
    assert_eq!(
        labels.iter().find(|(id, _)| id == "P003").unwrap().1,
        Label::Excluded
    );
}

#[test]
fn all_50_indicators_match_the_frozen_golden_matrix() {
    let corpus = load_corpus();
    let index = build_index(&corpus, IpcLevel::Subclass).unwrap();
    let cfg = FieldConfig::default();
    let (matrix, warnings) = compute_all(&corpus, &index, &cfg, LabelPolicy::default()).unwrap();
    assert!(warnings.is_empty());

    let golden = read_matrix_csv(&data("golden_matrix.csv")).unwrap();
    assert_eq!(matrix.feature_names, golden.feature_names);
    assert_eq!(matrix.patent_ids, golden.patent_ids);
    assert_eq!(matrix.labels, golden.labels);
    assert_eq!(matrix.n_rows(), 4); // the EXCLUDED patent is dropped

    for (row, (got, want)) in matrix.rows.iter().zip(&golden.rows).enumerate() {
        for (col, (g, w)) in got.iter().zip(want).enumerate() {
            let name = FEATURE_NAMES[col];
            if *w == w.trunc() {
                assert_eq!(g, w, "{} col {name}", matrix.patent_ids[row]);
            } else {
                assert!(
                    (g - w).abs() < 1e-9,
                    "{} col {name}: {g} vs {w}",
                    matrix.patent_ids[row]
                );
            }
        }
    }
}

#[test]
fn named_fixture_values_hold() {
    let corpus = load_corpus();
    let p001 = corpus.iter().find(|r| r.patent_id == "P001").unwrap();
    // two cited patents with disjoint single IPCs plus one without IPCs
    assert!((technology_breadth(p001, IpcLevel::Subclass) - 0.5).abs() < 1e-12);

    let index = build_index(&corpus, IpcLevel::Subclass).unwrap();
    let cfg = FieldConfig::default();
    let (matrix, _) = compute_all(&corpus, &index, &cfg, LabelPolicy::default()).unwrap();
    let row = |id: &str| {
        let at = matrix.patent_ids.iter().position(|p| p == id).unwrap();
        &matrix.rows[at]
    };
    let col = |name: &str| FEATURE_NAMES.iter().position(|&n| n == name).unwrap();
    // {100, 400, 900}-day gaps -> median 400
    assert_eq!(row("P001")[col("TE_5")], 400.0);
    // identical record/cited titles -> similarity 1
    assert!((row("P005")[col("PK_6")] - 1.0).abs() < 1e-9);
    // CP_1 == CP_2 + CP_3 on every row
    for r in &matrix.rows {
        assert_eq!(r[col("CP_1")], r[col("CP_2")] + r[col("CP_3")]);
    }
}

#[test]
fn all_excluded_corpus_yields_empty_matrix_with_warning() {
    let mut corpus = load_corpus();
    for record in &mut corpus {
        record.lifetime_years = patval::corpus::Lifetime::Years(8);
    }
    let index = build_index(&corpus, IpcLevel::Subclass).unwrap();
    let cfg = FieldConfig::default();
    let (matrix, warnings) = compute_all(&corpus, &index, &cfg, LabelPolicy::default()).unwrap();
    assert_eq!(matrix.n_rows(), 0);
    assert_eq!(warnings.len(), 1);
    assert!(warnings[0].contains("EXCLUDED"));
}

#[test]
fn matrix_is_invariant_under_corpus_permutation() {
    let mut corpus = load_corpus();
    let index = build_index(&corpus, IpcLevel::Subclass).unwrap();
    let cfg = FieldConfig::default();
    let (m1, _) = compute_all(&corpus, &index, &cfg, LabelPolicy::default()).unwrap();
    corpus.reverse();
    let index2 = build_index(&corpus, IpcLevel::Subclass).unwrap();
    let (m2, _) = compute_all(&corpus, &index2, &cfg, LabelPolicy::default()).unwrap();
    assert_eq!(m1, m2);
}

#[test]
fn canonical_emission_round_trips_the_golden_corpus() {
    let corpus = load_corpus();
    let mut bytes = Vec::new();
    emit_canonical(&corpus, &mut bytes).unwrap();
    let tmp = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(tmp.path(), &bytes).unwrap();
    let reparsed = parse_corpus(tmp.path(), CorpusFormat::Jsonl, true).unwrap();
    let mut sorted = corpus.clone();
    sorted.sort_by(|a, b| a.patent_id.cmp(&b.patent_id));
    assert_eq!(sorted, reparsed.records);
}
