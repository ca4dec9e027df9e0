//! Corpus aggregation: per-(IPC, year) activity counts and per-party grant
//! histories. Built once after parsing; read-only afterwards.

use super::{canonical_name, ipc_prefix, IpcLevel, PatentRecord};
use crate::error::{Error, Result};
use chrono::{Datelike, NaiveDate};
use std::collections::{BTreeMap, BTreeSet};

/// Counts for one (IPC, grant year) cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct YearCell {
    /// Patents granted in that year carrying the IPC (each patent counted
    /// once per distinct IPC at the index level).
    pub patents: u32,
    /// Distinct canonicalized assignee names on those patents.
    pub applicants: u32,
}

/// Immutable lookup structure backing the technology-environment and
/// prior-knowledge indicators.
#[derive(Debug, Clone)]
pub struct CorpusIndex {
    level: IpcLevel,
    by_ipc_year: BTreeMap<(String, i32), YearCell>,
    /// (ipc, year) -> patents granted up to and including that year, with
    /// one entry per year observed for the ipc.
    by_ipc_cumulative: BTreeMap<(String, i32), u32>,
    by_assignee: BTreeMap<String, Vec<(NaiveDate, Vec<String>)>>,
    by_inventor: BTreeMap<String, Vec<NaiveDate>>,
}

impl CorpusIndex {
    pub fn level(&self) -> IpcLevel {
        self.level
    }

    /// Patents granted in `year` carrying `ipc`.
    pub fn patents_in_year(&self, ipc: &str, year: i32) -> u32 {
        self.by_ipc_year
            .get(&(ipc.to_string(), year))
            .map_or(0, |c| c.patents)
    }

    /// Distinct applicants granted patents carrying `ipc` in `year`.
    pub fn applicants_in_year(&self, ipc: &str, year: i32) -> u32 {
        self.by_ipc_year
            .get(&(ipc.to_string(), year))
            .map_or(0, |c| c.applicants)
    }

    /// Patents granted up to and including `year` carrying `ipc`.
    pub fn cumulative_through(&self, ipc: &str, year: i32) -> u32 {
        self.by_ipc_cumulative
            .range((ipc.to_string(), i32::MIN)..=(ipc.to_string(), year))
            .next_back()
            .map_or(0, |(_, &cum)| cum)
    }

    /// Grant history (date, ipcs) of one canonicalized assignee name.
    pub fn assignee_history(&self, canonical: &str) -> &[(NaiveDate, Vec<String>)] {
        self.by_assignee
            .get(canonical)
            .map_or(&[], |v| v.as_slice())
    }

    /// Grant dates of one canonicalized inventor name.
    pub fn inventor_history(&self, canonical: &str) -> &[NaiveDate] {
        self.by_inventor.get(canonical).map_or(&[], |v| v.as_slice())
    }

    /// All (ipc, year) cells, for audits.
    pub fn year_cells(&self) -> impl Iterator<Item = (&(String, i32), &YearCell)> {
        self.by_ipc_year.iter()
    }
}

/// Build the index at `level`. Every record IPC must resolve to that level.
pub fn build_index(corpus: &[PatentRecord], level: IpcLevel) -> Result<CorpusIndex> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut by_ipc_year: BTreeMap<(String, i32), YearCell> = BTreeMap::new();
    let mut applicants: BTreeMap<(String, i32), BTreeSet<String>> = BTreeMap::new();
    let mut by_assignee: BTreeMap<String, Vec<(NaiveDate, Vec<String>)>> = BTreeMap::new();
    let mut by_inventor: BTreeMap<String, Vec<NaiveDate>> = BTreeMap::new();

    for record in corpus {
        let year = record.grant_date.year();
        let mut prefixes = BTreeSet::new();
        for code in &record.ipcs {
            prefixes.insert(ipc_prefix(code, level)?);
        }
        for prefix in &prefixes {
            by_ipc_year
                .entry((prefix.clone(), year))
                .or_default()
                .patents += 1;
            let names = applicants.entry((prefix.clone(), year)).or_default();
            for a in &record.assignees {
                names.insert(canonical_name(&a.name));
            }
        }
        for a in &record.assignees {
            by_assignee
                .entry(canonical_name(&a.name))
                .or_default()
                .push((record.grant_date, record.ipcs.clone()));
        }
        for i in &record.inventors {
            by_inventor
                .entry(canonical_name(&i.name))
                .or_default()
                .push(record.grant_date);
        }
    }

    for ((ipc, year), names) in applicants {
        by_ipc_year
            .get_mut(&(ipc, year))
            .expect("cell created above")
            .applicants = names.len() as u32;
    }

    let mut by_ipc_cumulative = BTreeMap::new();
    let mut current_ipc: Option<&str> = None;
    let mut running = 0u32;
    for ((ipc, year), cell) in &by_ipc_year {
        if current_ipc != Some(ipc.as_str()) {
            current_ipc = Some(ipc.as_str());
            running = 0;
        }
        running += cell.patents;
        by_ipc_cumulative.insert((ipc.clone(), *year), running);
    }

    Ok(CorpusIndex {
        level,
        by_ipc_year,
        by_ipc_cumulative,
        by_assignee,
        by_inventor,
    })
}
