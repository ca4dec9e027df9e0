//! Per-record indicator computations.

use super::{FieldConfig, SimilarityModel, FEATURE_COUNT};
use crate::corpus::{
    canonical_name, country_key, ipc_prefix, ipc_section, is_us, CorpusIndex, IpcLevel,
    PatentRecord,
};
use crate::error::{Error, Result};
use chrono::Datelike;
use std::collections::BTreeSet;

/// Technology-environment block: corpus activity around the patent's
/// fields plus the technology-cycle-time median.
#[derive(Debug, Clone, PartialEq)]
pub struct TechEnvironment {
    /// TE_1: mean patents granted in the grant year across the patent's
    /// fields.
    pub activity: f64,
    /// TE_2: mean cumulative patents granted through the grant year.
    pub cumulative_size: f64,
    /// TE_3: mean distinct applicants in the grant year.
    pub applicants: f64,
    /// TE_4: the patent's IPC codes tallied per section A..H.
    pub sections: [f64; 8],
    /// TE_5: median filing-date gap to cited patents, in days.
    pub cycle_time: f64,
}

/// Prior-knowledge block.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorKnowledge {
    /// PK_1: non-patent-literature citation count.
    pub scientific: f64,
    /// PK_2: mean prior corpus patents per assignee.
    pub assignee_experience: f64,
    /// PK_3: mean prior corpus patents per inventor.
    pub inventor_experience: f64,
    /// PK_4: mean prior assignee patents inside the focal field.
    pub core_know_how: f64,
    /// PK_5: mean prior assignee patents outside the focal field.
    pub peripheral_know_how: f64,
    /// PK_6: mean title similarity with cited patents.
    pub semantic_similarity: f64,
    /// PK_7: share of the patent's subclasses also cited.
    pub inclusiveness: f64,
    /// PK_8: cited IPC codes tallied per section A..H.
    pub cited_sections: [f64; 8],
    /// PK_9: technology breadth of the citation set.
    pub breadth: f64,
    /// PK_10: citations inside the focal field.
    pub homogeneous_citations: f64,
}

/// All 50 indicators for one patent, grouped as in the feature-name table.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorVector {
    pub sc: [f64; 7],
    pub pr: [f64; 2],
    pub cp: [f64; 5],
    pub dec: [f64; 7],
    pub te: TechEnvironment,
    pub pk: PriorKnowledge,
}

impl IndicatorVector {
    /// Flatten into the canonical 50-column order of
    /// [`super::FEATURE_NAMES`].
    pub fn flatten(&self) -> [f64; FEATURE_COUNT] {
        let mut out = [0.0; FEATURE_COUNT];
        let mut i = 0;
        let mut push = |v: f64, i: &mut usize| {
            out[*i] = v;
            *i += 1;
        };
        for v in self.sc {
            push(v, &mut i);
        }
        for v in self.pr {
            push(v, &mut i);
        }
        for v in self.cp {
            push(v, &mut i);
        }
        for v in self.dec {
            push(v, &mut i);
        }
        push(self.te.activity, &mut i);
        push(self.te.cumulative_size, &mut i);
        push(self.te.applicants, &mut i);
        for v in self.te.sections {
            push(v, &mut i);
        }
        push(self.te.cycle_time, &mut i);
        push(self.pk.scientific, &mut i);
        push(self.pk.assignee_experience, &mut i);
        push(self.pk.inventor_experience, &mut i);
        push(self.pk.core_know_how, &mut i);
        push(self.pk.peripheral_know_how, &mut i);
        push(self.pk.semantic_similarity, &mut i);
        push(self.pk.inclusiveness, &mut i);
        for v in self.pk.cited_sections {
            push(v, &mut i);
        }
        push(self.pk.breadth, &mut i);
        push(self.pk.homogeneous_citations, &mut i);
        debug_assert_eq!(i, FEATURE_COUNT);
        out
    }
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn median(mut values: Vec<f64>) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite gaps"));
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}

fn section_slot(code: &str) -> Option<usize> {
    ipc_section(code).ok().map(|c| (c as u8 - b'A') as usize)
}

/// SC_1..SC_7: full-text size, citation nations, claim structure, and IPC
/// coverage.
pub fn compute_scope_coverage(record: &PatentRecord) -> [f64; 7] {
    let nations: BTreeSet<String> = record
        .backward_citations
        .iter()
        .map(|c| country_key(&c.cited_country))
        .collect();
    let total = record.claims.len();
    let independent: Vec<_> = record.claims.iter().filter(|c| c.is_independent).collect();
    let dependent = total - independent.len();
    let indep_words = mean(independent.iter().map(|c| f64::from(c.word_count)));
    let distinct_ipcs: BTreeSet<&str> = record.ipcs.iter().map(|s| s.trim()).collect();
    [
        f64::from(record.fulltext_word_count),
        nations.len() as f64,
        total as f64,
        dependent as f64,
        independent.len() as f64,
        indep_words,
        distinct_ipcs.len() as f64,
    ]
}

/// PR_1..PR_2: priority count and distinct priority nations.
pub fn compute_priority(record: &PatentRecord) -> [f64; 2] {
    let nations: BTreeSet<String> = record
        .priorities
        .iter()
        .map(|p| country_key(&p.country))
        .collect();
    [record.priorities.len() as f64, nations.len() as f64]
}

/// CP_1..CP_5: citation dependency splits, grant lag in days, abstract
/// size.
pub fn compute_completeness(record: &PatentRecord) -> [f64; 5] {
    let total = record.backward_citations.len();
    let domestic = record
        .backward_citations
        .iter()
        .filter(|c| is_us(&c.cited_country))
        .count();
    let lag = (record.grant_date - record.filing_date).num_days();
    [
        total as f64,
        domestic as f64,
        (total - domestic) as f64,
        lag as f64,
        f64::from(record.abstract_word_count),
    ]
}

/// DEC_1..DEC_7: party counts, nation spreads, and the mean overdue-fee
/// count over assignees that have one recorded.
pub fn compute_dev_effort(record: &PatentRecord) -> [f64; 7] {
    let assignee_nations: BTreeSet<String> = record
        .assignees
        .iter()
        .map(|p| country_key(&p.country))
        .collect();
    let inventor_nations: BTreeSet<String> = record
        .inventors
        .iter()
        .map(|p| country_key(&p.country))
        .collect();
    let overdue = mean(
        record
            .assignees
            .iter()
            .filter_map(|p| p.overdue_fee_count.map(f64::from)),
    );
    [
        record.assignees.len() as f64,
        record.assignees.iter().filter(|p| !is_us(&p.country)).count() as f64,
        assignee_nations.len() as f64,
        record.inventors.len() as f64,
        record.inventors.iter().filter(|p| !is_us(&p.country)).count() as f64,
        inventor_nations.len() as f64,
        overdue,
    ]
}

fn field_prefixes(record: &PatentRecord, level: IpcLevel) -> Result<BTreeSet<String>> {
    let mut out = BTreeSet::new();
    for code in &record.ipcs {
        out.insert(ipc_prefix(code, level)?);
    }
    Ok(out)
}

/// TE_1..TE_5 from the corpus index. Errors when the record carries no
/// parseable IPC.
pub fn compute_tech_environment(
    record: &PatentRecord,
    index: &CorpusIndex,
) -> Result<TechEnvironment> {
    let fields = field_prefixes(record, index.level())?;
    if fields.is_empty() {
        return Err(Error::Record {
            patent_id: record.patent_id.clone(),
            message: "no parseable IPC codes".to_string(),
        });
    }
    let year = record.grant_date.year();
    let activity = mean(fields.iter().map(|f| f64::from(index.patents_in_year(f, year))));
    let cumulative = mean(
        fields
            .iter()
            .map(|f| f64::from(index.cumulative_through(f, year))),
    );
    let applicants = mean(
        fields
            .iter()
            .map(|f| f64::from(index.applicants_in_year(f, year))),
    );

    let mut sections = [0.0; 8];
    for code in &record.ipcs {
        if let Some(slot) = section_slot(code) {
            sections[slot] += 1.0;
        }
    }

    let gaps: Vec<f64> = record
        .backward_citations
        .iter()
        .filter_map(|c| c.cited_filing_date)
        .map(|cited| (record.filing_date - cited).num_days() as f64)
        .collect();

    Ok(TechEnvironment {
        activity,
        cumulative_size: cumulative,
        applicants,
        sections,
        cycle_time: median(gaps),
    })
}

/// Technology breadth of the citation set: one minus the concentration of
/// cited patents over IPC prefixes at `level`. A cited patent participates
/// when at least one of its IPCs resolves at that level. Clamped at zero
/// so the value stays in `[0, 1)` even when cited patents span several
/// prefixes each.
pub fn technology_breadth(record: &PatentRecord, level: IpcLevel) -> f64 {
    let cited_fields: Vec<BTreeSet<String>> = record
        .backward_citations
        .iter()
        .filter_map(|c| c.cited_ipcs.as_ref())
        .map(|codes| {
            codes
                .iter()
                .filter_map(|code| ipc_prefix(code, level).ok())
                .collect::<BTreeSet<String>>()
        })
        .filter(|set| !set.is_empty())
        .collect();
    let total = cited_fields.len();
    if total == 0 {
        return 0.0;
    }
    let mut per_field: std::collections::BTreeMap<&str, u32> = std::collections::BTreeMap::new();
    for set in &cited_fields {
        for field in set {
            *per_field.entry(field.as_str()).or_insert(0) += 1;
        }
    }
    let concentration: f64 = per_field
        .values()
        .map(|&count| {
            let share = f64::from(count) / total as f64;
            share * share
        })
        .sum();
    (1.0 - concentration).max(0.0)
}

/// PK_1..PK_10. "Prior" means granted strictly before this record's grant
/// date; ties are excluded.
pub fn compute_prior_knowledge(
    record: &PatentRecord,
    index: &CorpusIndex,
    cfg: &FieldConfig,
    sim: &SimilarityModel,
) -> Result<PriorKnowledge> {
    let grant = record.grant_date;

    let mut prior_counts = Vec::new();
    let mut core_counts = Vec::new();
    let mut peripheral_counts = Vec::new();
    for assignee in &record.assignees {
        let history = index.assignee_history(&canonical_name(&assignee.name));
        let prior: Vec<_> = history.iter().filter(|(d, _)| *d < grant).collect();
        let core = prior
            .iter()
            .filter(|(_, ipcs)| ipcs.iter().any(|c| cfg.in_focal_field(c)))
            .count();
        prior_counts.push(prior.len() as f64);
        core_counts.push(core as f64);
        peripheral_counts.push((prior.len() - core) as f64);
    }

    let inventor_counts: Vec<f64> = record
        .inventors
        .iter()
        .map(|inv| {
            index
                .inventor_history(&canonical_name(&inv.name))
                .iter()
                .filter(|d| **d < grant)
                .count() as f64
        })
        .collect();

    let mut sims = Vec::new();
    for citation in &record.backward_citations {
        if let Some(s) = sim.record_citation_similarity(record, citation)? {
            sims.push(s);
        }
    }

    let record_subclasses: BTreeSet<String> = record
        .ipcs
        .iter()
        .filter_map(|c| ipc_prefix(c, IpcLevel::Subclass).ok())
        .collect();
    let cited_subclasses: BTreeSet<String> = record
        .backward_citations
        .iter()
        .filter_map(|c| c.cited_ipcs.as_ref())
        .flatten()
        .filter_map(|c| ipc_prefix(c, IpcLevel::Subclass).ok())
        .collect();
    let inclusiveness = if record_subclasses.is_empty() {
        0.0
    } else {
        record_subclasses.intersection(&cited_subclasses).count() as f64
            / record_subclasses.len() as f64
    };

    let mut cited_sections = [0.0; 8];
    for citation in &record.backward_citations {
        for code in citation.cited_ipcs.iter().flatten() {
            if let Some(slot) = section_slot(code) {
                cited_sections[slot] += 1.0;
            }
        }
    }

    let homogeneous = record
        .backward_citations
        .iter()
        .filter(|c| {
            c.cited_ipcs
                .iter()
                .flatten()
                .any(|code| cfg.in_focal_field(code))
        })
        .count();

    Ok(PriorKnowledge {
        scientific: f64::from(record.npl_citation_count),
        assignee_experience: mean(prior_counts),
        inventor_experience: mean(inventor_counts),
        core_know_how: mean(core_counts),
        peripheral_know_how: mean(peripheral_counts),
        semantic_similarity: mean(sims),
        inclusiveness,
        cited_sections,
        breadth: technology_breadth(record, cfg.ipc_level),
        homogeneous_citations: homogeneous as f64,
    })
}

/// All six blocks for one record.
pub fn compute_indicators(
    record: &PatentRecord,
    index: &CorpusIndex,
    cfg: &FieldConfig,
    sim: &SimilarityModel,
) -> Result<IndicatorVector> {
    Ok(IndicatorVector {
        sc: compute_scope_coverage(record),
        pr: compute_priority(record),
        cp: compute_completeness(record),
        dec: compute_dev_effort(record),
        te: compute_tech_environment(record, index)?,
        pk: compute_prior_knowledge(record, index, cfg, sim)?,
    })
}
