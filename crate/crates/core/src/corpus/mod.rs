//! Patent records: parsing, validation, labeling, and corpus indexing.
//!
//! A corpus is built once (single writer), validated, and then shared
//! immutably with every downstream module. All corpus-relative statistics
//! are computed against the supplied corpus, which stands in for the full
//! patent universe.

mod index;
mod parse;

pub use index::{build_index, CorpusIndex, YearCell};
pub use parse::{
    emit_canonical, parse_corpus, CorpusFormat, ParseOutcome, RowDiagnostic,
};

use crate::error::{Error, Result};
use chrono::NaiveDate;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// One claim of a patent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub is_independent: bool,
    pub word_count: u32,
}

/// An assignee or inventor. `overdue_fee_count` is only meaningful for
/// assignees and may be unrecorded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Party {
    pub name: String,
    pub country: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overdue_fee_count: Option<u32>,
}

/// A backward citation. Filing date, IPCs, and title of the cited document
/// are present only when the source data carries them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationRef {
    pub cited_id: String,
    pub cited_country: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cited_filing_date: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cited_ipcs: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cited_title: Option<String>,
}

/// A priority filing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriorityRef {
    pub priority_id: String,
    pub country: String,
}

/// A maintenance-fee event at the 4-, 8-, or 12-year mark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaintenanceEvent {
    pub event_year_offset: u8,
    pub paid: bool,
    pub surcharge: bool,
}

/// Observed lifetime of a patent: a year count, or the maximum-term
/// sentinel. The maximum term is kept symbolic because its calendar length
/// is only approximate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lifetime {
    Years(u32),
    Max,
}

impl Serialize for Lifetime {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Lifetime::Years(n) => s.serialize_u32(*n),
            Lifetime::Max => s.serialize_str("max"),
        }
    }
}

impl<'de> Deserialize<'de> for Lifetime {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Years(u32),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Years(n) => Ok(Lifetime::Years(n)),
            Raw::Text(s) if s.eq_ignore_ascii_case("max") => Ok(Lifetime::Max),
            Raw::Text(s) => Err(serde::de::Error::custom(format!(
                "lifetime_years must be a nonnegative integer or \"max\", got {s:?}"
            ))),
        }
    }
}

/// One patent's raw data: the unit of ingestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatentRecord {
    pub patent_id: String,
    pub filing_date: NaiveDate,
    pub grant_date: NaiveDate,
    pub title: String,
    pub abstract_word_count: u32,
    pub fulltext_word_count: u32,
    pub claims: Vec<Claim>,
    pub ipcs: Vec<String>,
    pub assignees: Vec<Party>,
    pub inventors: Vec<Party>,
    pub backward_citations: Vec<CitationRef>,
    pub npl_citation_count: u32,
    pub priorities: Vec<PriorityRef>,
    pub maintenance_events: Vec<MaintenanceEvent>,
    pub lifetime_years: Lifetime,
}

/// Technology-value label derived from the lifetime proxy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    /// Valuable patent: maintained to the maximum term.
    Vp,
    /// Non-valuable patent: lapsed at the first maintenance mark.
    Nvp,
    /// Out of the VP/NVP contrast; dropped from the model matrix.
    Excluded,
}

/// Which lifetime maps to NVP. Everything that is neither `Max` nor the NVP
/// lifetime is excluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelPolicy {
    pub nvp_lifetime_years: u32,
}

impl Default for LabelPolicy {
    fn default() -> Self {
        LabelPolicy {
            nvp_lifetime_years: 4,
        }
    }
}

/// Total, deterministic lifetime-to-label mapping.
pub fn derive_label(record: &PatentRecord, policy: LabelPolicy) -> Label {
    match record.lifetime_years {
        Lifetime::Max => Label::Vp,
        Lifetime::Years(n) if n == policy.nvp_lifetime_years => Label::Nvp,
        Lifetime::Years(_) => Label::Excluded,
    }
}

/// IPC hierarchy level used for corpus aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IpcLevel {
    Section,
    Class,
    Subclass,
}

impl IpcLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            IpcLevel::Section => "section",
            IpcLevel::Class => "class",
            IpcLevel::Subclass => "subclass",
        }
    }
}

/// Section letter (A–H) of an IPC code like `"H01L21/02"`.
pub fn ipc_section(code: &str) -> Result<char> {
    let c = code.trim().chars().next().map(|c| c.to_ascii_uppercase());
    match c {
        Some(c @ 'A'..='H') => Ok(c),
        _ => Err(Error::IpcLevel {
            code: code.to_string(),
            level: "section".to_string(),
        }),
    }
}

/// Prefix of an IPC code at the given level: 1 character for section,
/// 3 for class (`H01`), 4 for subclass (`H01L`).
pub fn ipc_prefix(code: &str, level: IpcLevel) -> Result<String> {
    let trimmed = code.trim();
    ipc_section(trimmed)?;
    let want = match level {
        IpcLevel::Section => 1,
        IpcLevel::Class => 3,
        IpcLevel::Subclass => 4,
    };
    let prefix: String = trimmed.chars().take(want).collect();
    let ok = prefix.len() == want
        && match level {
            IpcLevel::Section => true,
            IpcLevel::Class => prefix[1..3].bytes().all(|b| b.is_ascii_digit()),
            IpcLevel::Subclass => {
                prefix[1..3].bytes().all(|b| b.is_ascii_digit())
                    && prefix.as_bytes()[3].is_ascii_alphabetic()
            }
        };
    if ok {
        Ok(prefix.to_ascii_uppercase())
    } else {
        Err(Error::IpcLevel {
            code: code.to_string(),
            level: level.as_str().to_string(),
        })
    }
}

/// Canonical party name: case-folded, punctuation stripped, whitespace
/// collapsed. No fuzzy disambiguation.
pub fn canonical_name(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    let mut pending_space = false;
    for ch in name.chars() {
        let ch = if ch.is_alphanumeric() {
            Some(ch.to_lowercase().next().unwrap_or(ch))
        } else if ch.is_whitespace() {
            None
        } else {
            // punctuation dropped entirely
            continue;
        };
        match ch {
            Some(c) => {
                if pending_space && !out.is_empty() {
                    out.push(' ');
                }
                pending_space = false;
                out.push(c);
            }
            None => pending_space = true,
        }
    }
    out
}

/// Country comparison helper: ISO-like strings compared case-insensitively.
pub fn is_us(country: &str) -> bool {
    country.trim().eq_ignore_ascii_case("US")
}

/// Uppercased, trimmed country key for distinct-country counts.
pub fn country_key(country: &str) -> String {
    country.trim().to_ascii_uppercase()
}

/// Structural validation of a single record against the type invariants.
pub fn validate_record(r: &PatentRecord) -> Result<()> {
    let fail = |message: String| {
        Err(Error::Record {
            patent_id: r.patent_id.clone(),
            message,
        })
    };
    if r.patent_id.trim().is_empty() {
        return fail("empty patent_id".into());
    }
    if r.grant_date < r.filing_date {
        return fail(format!(
            "grant_date {} precedes filing_date {}",
            r.grant_date, r.filing_date
        ));
    }
    for code in &r.ipcs {
        if ipc_section(code).is_err() {
            return fail(format!("IPC {code:?} has no A-H section"));
        }
    }
    for (i, c) in r.claims.iter().enumerate() {
        if c.word_count == 0 {
            return fail(format!("claim {i} has word_count 0"));
        }
    }
    for p in r.assignees.iter().chain(r.inventors.iter()) {
        if canonical_name(&p.name).is_empty() {
            return fail(format!("party name {:?} canonicalizes to empty", p.name));
        }
    }
    for c in &r.backward_citations {
        if c.cited_id.trim().is_empty() {
            return fail("citation with empty cited_id".into());
        }
    }
    for p in &r.priorities {
        if p.priority_id.trim().is_empty() {
            return fail("priority with empty priority_id".into());
        }
    }
    let mut offsets = Vec::new();
    for ev in &r.maintenance_events {
        if ![4, 8, 12].contains(&ev.event_year_offset) {
            return fail(format!(
                "maintenance event at offset {} (expected 4, 8, or 12)",
                ev.event_year_offset
            ));
        }
        if offsets.contains(&ev.event_year_offset) {
            return fail(format!(
                "duplicate maintenance event at offset {}",
                ev.event_year_offset
            ));
        }
        offsets.push(ev.event_year_offset);
    }
    Ok(())
}
