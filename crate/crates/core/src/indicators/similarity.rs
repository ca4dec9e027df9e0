//! Title similarity for the prior-knowledge block: corpus-level TF-IDF as
//! the zero-dependency default, or precomputed unit vectors loaded from a
//! side file.

use super::{EmbeddingSource, FieldConfig};
use crate::corpus::{CitationRef, PatentRecord};
use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

/// Lowercased alphanumeric word tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            for c in ch.to_lowercase() {
                current.push(c);
            }
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Document frequencies over a title collection. One document per corpus
/// record title plus one per cited title present in the corpus.
#[derive(Debug, Clone)]
pub struct TfidfVocab {
    df: BTreeMap<String, u32>,
    n_docs: u32,
}

impl TfidfVocab {
    pub fn from_documents<'a, I: IntoIterator<Item = &'a str>>(docs: I) -> Self {
        let mut df: BTreeMap<String, u32> = BTreeMap::new();
        let mut n_docs = 0;
        for doc in docs {
            n_docs += 1;
            let mut seen = std::collections::BTreeSet::new();
            for tok in tokenize(doc) {
                if seen.insert(tok.clone()) {
                    *df.entry(tok).or_insert(0) += 1;
                }
            }
        }
        TfidfVocab { df, n_docs }
    }

    /// Smoothed inverse document frequency; strictly positive so identical
    /// titles always score 1.
    fn idf(&self, token: &str) -> f64 {
        let df = self.df.get(token).copied().unwrap_or(0);
        (f64::from(1 + self.n_docs) / f64::from(1 + df)).ln() + 1.0
    }

    fn vector(&self, title: &str) -> BTreeMap<String, f64> {
        let mut counts: BTreeMap<String, f64> = BTreeMap::new();
        for tok in tokenize(title) {
            *counts.entry(tok).or_insert(0.0) += 1.0;
        }
        for (tok, v) in counts.iter_mut() {
            *v *= self.idf(tok);
        }
        counts
    }

    /// TF-IDF cosine of two titles; 0 when either tokenizes to nothing.
    pub fn cosine(&self, title_a: &str, title_b: &str) -> f64 {
        let a = self.vector(title_a);
        let b = self.vector(title_b);
        let dot: f64 = a
            .iter()
            .filter_map(|(tok, va)| b.get(tok).map(|vb| va * vb))
            .sum();
        let na: f64 = a.values().map(|v| v * v).sum::<f64>().sqrt();
        let nb: f64 = b.values().map(|v| v * v).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            0.0
        } else {
            dot / (na * nb)
        }
    }
}

/// Precomputed unit vectors keyed by patent_id.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    vectors: BTreeMap<String, Vec<f64>>,
    dim: usize,
}

impl EmbeddingTable {
    /// Parse a `"patent_id, d, v1..vd"` file. The dimension must be
    /// constant and every vector unit-norm.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut vectors = BTreeMap::new();
        let mut dim = None;
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let bad = |message: String| Error::MalformedRow {
                file: path.display().to_string(),
                line: lineno,
                message,
            };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() < 3 {
                return Err(bad("expected patent_id, d, v1..vd".into()));
            }
            let id = fields[0].to_string();
            let d: usize = fields[1]
                .parse()
                .map_err(|_| bad(format!("bad dimension {:?}", fields[1])))?;
            if fields.len() - 2 != d {
                return Err(bad(format!("declared {d} components, found {}", fields.len() - 2)));
            }
            if *dim.get_or_insert(d) != d {
                return Err(bad(format!(
                    "dimension {d} differs from earlier rows ({})",
                    dim.unwrap()
                )));
            }
            let mut v = Vec::with_capacity(d);
            for f in &fields[2..] {
                v.push(
                    f.parse::<f64>()
                        .map_err(|_| bad(format!("bad component {f:?}")))?,
                );
            }
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-6 {
                return Err(bad(format!("vector for {id} has norm {norm}, expected 1")));
            }
            vectors.insert(id, v);
        }
        Ok(EmbeddingTable {
            dim: dim.unwrap_or(0),
            vectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dot product of two unit vectors; errors name the missing key.
    pub fn similarity(&self, id_a: &str, id_b: &str) -> Result<f64> {
        let a = self
            .vectors
            .get(id_a)
            .ok_or_else(|| Error::MissingEmbedding(id_a.to_string()))?;
        let b = self
            .vectors
            .get(id_b)
            .ok_or_else(|| Error::MissingEmbedding(id_b.to_string()))?;
        Ok(a.iter().zip(b).map(|(x, y)| x * y).sum())
    }
}

/// Title-similarity backend selected by [`FieldConfig::embedding_source`].
#[derive(Debug, Clone)]
pub enum SimilarityModel {
    Lexical(TfidfVocab),
    External(EmbeddingTable),
}

impl SimilarityModel {
    pub fn for_corpus(corpus: &[PatentRecord], cfg: &FieldConfig) -> Result<Self> {
        match &cfg.embedding_source {
            EmbeddingSource::LexicalFallback => {
                let docs = corpus.iter().flat_map(|r| {
                    std::iter::once(r.title.as_str()).chain(
                        r.backward_citations
                            .iter()
                            .filter_map(|c| c.cited_title.as_deref()),
                    )
                });
                Ok(SimilarityModel::Lexical(TfidfVocab::from_documents(docs)))
            }
            EmbeddingSource::ExternalFile { path } => {
                Ok(SimilarityModel::External(EmbeddingTable::from_file(path)?))
            }
        }
    }

    /// Similarity between a record and one of its citations, or `None`
    /// when the pair cannot participate (lexical mode without a cited
    /// title).
    pub fn record_citation_similarity(
        &self,
        record: &PatentRecord,
        citation: &CitationRef,
    ) -> Result<Option<f64>> {
        match self {
            SimilarityModel::Lexical(vocab) => Ok(citation
                .cited_title
                .as_deref()
                .map(|t| vocab.cosine(&record.title, t))),
            SimilarityModel::External(table) => table
                .similarity(&record.patent_id, &citation.cited_id)
                .map(Some),
        }
    }
}
