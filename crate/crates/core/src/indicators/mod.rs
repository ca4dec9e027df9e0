//! The 50 quantitative indicators computed per patent, and the assembly of
//! the model input matrix.
//!
//! Indicator blocks:
//! - `SC_1..SC_7` scope and coverage
//! - `PR_1..PR_2` priority
//! - `CP_1..CP_5` completeness
//! - `DEC_1..DEC_7` development effort and capabilities
//! - `TE_1..TE_5` technology environment (`TE_4` is 8 per-section counts)
//! - `PK_1..PK_10` prior knowledge (`PK_8` is 8 per-section counts)
//!
//! All per-record computations are pure functions over the immutable corpus
//! and index; rows are computed in parallel and assembled in patent-id
//! order.

mod blocks;
mod matrix;
mod similarity;

pub use blocks::{
    compute_completeness, compute_dev_effort, compute_indicators, compute_prior_knowledge,
    compute_priority, compute_scope_coverage, compute_tech_environment, technology_breadth,
    IndicatorVector, PriorKnowledge, TechEnvironment,
};
pub use matrix::{read_matrix_csv, write_matrix_csv, FeatureMatrix};
pub use similarity::{tokenize, EmbeddingTable, SimilarityModel, TfidfVocab};

use crate::corpus::{derive_label, CorpusIndex, IpcLevel, Label, LabelPolicy, PatentRecord};
use crate::error::{Error, Result};
use std::path::PathBuf;

/// Number of indicators per patent.
pub const FEATURE_COUNT: usize = 50;

/// Canonical indicator order used everywhere: matrix columns, attribution
/// vectors, and emitted CSV headers.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "SC_1", "SC_2", "SC_3", "SC_4", "SC_5", "SC_6", "SC_7", "PR_1", "PR_2", "CP_1", "CP_2",
    "CP_3", "CP_4", "CP_5", "DEC_1", "DEC_2", "DEC_3", "DEC_4", "DEC_5", "DEC_6", "DEC_7",
    "TE_1", "TE_2", "TE_3", "TE_4(A)", "TE_4(B)", "TE_4(C)", "TE_4(D)", "TE_4(E)", "TE_4(F)",
    "TE_4(G)", "TE_4(H)", "TE_5", "PK_1", "PK_2", "PK_3", "PK_4", "PK_5", "PK_6", "PK_7",
    "PK_8(A)", "PK_8(B)", "PK_8(C)", "PK_8(D)", "PK_8(E)", "PK_8(F)", "PK_8(G)", "PK_8(H)",
    "PK_9", "PK_10",
];

/// Index of a feature name in [`FEATURE_NAMES`].
pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|&n| n == name)
}

/// Where title vectors for the semantic-similarity indicator come from.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum EmbeddingSource {
    /// Corpus-level TF-IDF over lowercased word tokens. Runs with zero
    /// external dependencies.
    LexicalFallback,
    /// Precomputed unit vectors keyed by patent_id, one `"id, d, v1..vd"`
    /// line per patent.
    ExternalFile { path: PathBuf },
}

/// Field-of-interest configuration for the prior-knowledge block.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct FieldConfig {
    /// IPC prefix delimiting the focal technology field.
    pub focal_field: String,
    /// Aggregation level for corpus-relative statistics.
    pub ipc_level: IpcLevel,
    pub embedding_source: EmbeddingSource,
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig {
            focal_field: "H01L".to_string(),
            ipc_level: IpcLevel::Subclass,
            embedding_source: EmbeddingSource::LexicalFallback,
        }
    }
}

impl FieldConfig {
    pub fn validate(&self) -> Result<()> {
        let f = self.focal_field.trim();
        let mut chars = f.chars();
        let section_ok = matches!(chars.next(), Some('A'..='H' | 'a'..='h'));
        let rest_ok = chars.all(|c| c.is_ascii_alphanumeric() || c == '/');
        if f.is_empty() || !section_ok || !rest_ok {
            return Err(Error::Config(format!(
                "focal_field {:?} is not an IPC prefix",
                self.focal_field
            )));
        }
        Ok(())
    }

    /// Does `code` fall inside the focal field?
    pub fn in_focal_field(&self, code: &str) -> bool {
        code.trim()
            .to_ascii_uppercase()
            .starts_with(&self.focal_field.trim().to_ascii_uppercase())
    }
}

/// Compute the full feature matrix for the VP/NVP patents of a corpus.
/// EXCLUDED patents are dropped; rows are keyed and ordered by patent_id.
/// Returns the matrix plus any non-fatal warnings.
pub fn compute_all(
    corpus: &[PatentRecord],
    index: &CorpusIndex,
    cfg: &FieldConfig,
    policy: LabelPolicy,
) -> Result<(FeatureMatrix, Vec<String>)> {
    cfg.validate()?;
    let sim = SimilarityModel::for_corpus(corpus, cfg)?;

    let mut labeled: Vec<(&PatentRecord, bool)> = corpus
        .iter()
        .filter_map(|r| match derive_label(r, policy) {
            Label::Vp => Some((r, true)),
            Label::Nvp => Some((r, false)),
            Label::Excluded => None,
        })
        .collect();
    labeled.sort_by(|a, b| a.0.patent_id.cmp(&b.0.patent_id));

    let mut warnings = Vec::new();
    if labeled.is_empty() {
        warnings.push("all patents are EXCLUDED; feature matrix is empty".to_string());
    }

    let computed = crate::parallel::map_slice(&labeled, |(record, _)| {
        compute_indicators(record, index, cfg, &sim).map(|iv| iv.flatten().to_vec())
    });

    let mut rows = Vec::with_capacity(labeled.len());
    for ((record, _), row) in labeled.iter().zip(computed) {
        match row {
            Ok(r) => rows.push(r),
            Err(e) => {
                return Err(Error::Record {
                    patent_id: record.patent_id.clone(),
                    message: e.to_string(),
                })
            }
        }
    }

    Ok((
        FeatureMatrix {
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            patent_ids: labeled.iter().map(|(r, _)| r.patent_id.clone()).collect(),
            rows,
            labels: labeled.iter().map(|&(_, vp)| vp).collect(),
        },
        warnings,
    ))
}
