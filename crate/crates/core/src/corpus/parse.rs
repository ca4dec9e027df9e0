//! Corpus ingestion: JSONL and CSV-bundle readers plus canonical emission.
//!
//! JSONL: one record per line, field names exactly as in [`PatentRecord`],
//! dates as ISO-8601 strings. CSV bundle: a directory holding `main.csv`
//! plus side tables (`claims.csv`, `citations.csv`, `parties.csv`,
//! `priorities.csv`, `maintenance.csv`) keyed by `patent_id`; the column
//! dictionary ships in `docs/csv-bundle.md`.

use super::{
    validate_record, CitationRef, Claim, Lifetime, MaintenanceEvent, Party, PatentRecord,
    PriorityRef,
};
use crate::error::{Error, Result};
use chrono::NaiveDate;
use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

/// Supported input formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CorpusFormat {
    #[serde(rename = "jsonl")]
    Jsonl,
    #[serde(rename = "csv-bundle")]
    CsvBundle,
}

/// A skipped input row with its location and reason.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RowDiagnostic {
    pub file: String,
    pub line: usize,
    pub message: String,
}

/// Parse result: well-formed records in input order plus per-row
/// diagnostics for the rows that were skipped.
#[derive(Debug)]
pub struct ParseOutcome {
    pub records: Vec<PatentRecord>,
    pub diagnostics: Vec<RowDiagnostic>,
}

/// Parse a corpus file. Malformed rows are skipped and reported; in strict
/// mode the first malformed row aborts the parse. Duplicate patent ids are
/// always fatal.
pub fn parse_corpus(path: &Path, format: CorpusFormat, strict: bool) -> Result<ParseOutcome> {
    let outcome = match format {
        CorpusFormat::Jsonl => parse_jsonl(path, strict)?,
        CorpusFormat::CsvBundle => parse_csv_bundle(path, strict)?,
    };
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for (row, record) in outcome.records.iter().enumerate() {
        if let Some(&first) = seen.get(record.patent_id.as_str()) {
            return Err(Error::DuplicateId {
                patent_id: record.patent_id.clone(),
                first: first + 1,
                second: row + 1,
            });
        }
        seen.insert(record.patent_id.as_str(), row);
    }
    Ok(outcome)
}

fn parse_jsonl(path: &Path, strict: bool) -> Result<ParseOutcome> {
    let file = fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let reader = BufReader::new(file);
    let file_name = path.display().to_string();
    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(&file_name, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let parsed: std::result::Result<PatentRecord, _> = serde_json::from_str(&line);
        let message = match parsed {
            Ok(record) => match validate_record(&record) {
                Ok(()) => {
                    records.push(record);
                    continue;
                }
                Err(e) => e.to_string(),
            },
            Err(e) => e.to_string(),
        };
        if strict {
            return Err(Error::MalformedRow {
                file: file_name,
                line: lineno,
                message,
            });
        }
        diagnostics.push(RowDiagnostic {
            file: file_name.clone(),
            line: lineno,
            message,
        });
    }
    Ok(ParseOutcome {
        records,
        diagnostics,
    })
}

/// Emit the corpus as deterministic JSONL sorted by patent_id. Re-parsing
/// the emission reproduces identical records.
pub fn emit_canonical<W: Write>(records: &[PatentRecord], mut out: W) -> Result<()> {
    let mut sorted: Vec<&PatentRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.patent_id.cmp(&b.patent_id));
    for record in sorted {
        let line = serde_json::to_string(record)
            .map_err(|e| Error::Invalid(format!("serialize {}: {e}", record.patent_id)))?;
        writeln!(out, "{line}").map_err(|e| Error::io("<canonical corpus>", e))?;
    }
    Ok(())
}

// ---- CSV bundle ----

struct SideTables {
    claims: HashMap<String, Vec<Claim>>,
    citations: HashMap<String, Vec<CitationRef>>,
    assignees: HashMap<String, Vec<Party>>,
    inventors: HashMap<String, Vec<Party>>,
    priorities: HashMap<String, Vec<PriorityRef>>,
    maintenance: HashMap<String, Vec<MaintenanceEvent>>,
}

fn parse_csv_bundle(dir: &Path, strict: bool) -> Result<ParseOutcome> {
    let mut diagnostics = Vec::new();
    let tables = SideTables {
        claims: read_claims(&dir.join("claims.csv"), strict, &mut diagnostics)?,
        citations: read_citations(&dir.join("citations.csv"), strict, &mut diagnostics)?,
        assignees: HashMap::new(),
        inventors: HashMap::new(),
        priorities: read_priorities(&dir.join("priorities.csv"), strict, &mut diagnostics)?,
        maintenance: read_maintenance(&dir.join("maintenance.csv"), strict, &mut diagnostics)?,
    };
    let mut tables = tables;
    read_parties(
        &dir.join("parties.csv"),
        strict,
        &mut diagnostics,
        &mut tables,
    )?;

    let main = dir.join("main.csv");
    let file_name = main.display().to_string();
    let mut reader = csv_reader(&main)?;
    let mut records = Vec::new();
    for (idx, row) in reader.deserialize::<MainRow>().enumerate() {
        let lineno = idx + 2; // header is line 1
        let assembled = row
            .map_err(|e| e.to_string())
            .and_then(|r| assemble(r, &tables).map_err(|e| e.to_string()))
            .and_then(|record| {
                validate_record(&record)
                    .map(|()| record)
                    .map_err(|e| e.to_string())
            });
        match assembled {
            Ok(record) => records.push(record),
            Err(message) => {
                if strict {
                    return Err(Error::MalformedRow {
                        file: file_name,
                        line: lineno,
                        message,
                    });
                }
                diagnostics.push(RowDiagnostic {
                    file: file_name.clone(),
                    line: lineno,
                    message,
                });
            }
        }
    }
    Ok(ParseOutcome {
        records,
        diagnostics,
    })
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    csv::ReaderBuilder::new()
        .flexible(false)
        .from_path(path)
        .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

#[derive(serde::Deserialize)]
struct MainRow {
    patent_id: String,
    filing_date: NaiveDate,
    grant_date: NaiveDate,
    title: String,
    abstract_word_count: u32,
    fulltext_word_count: u32,
    npl_citation_count: u32,
    ipcs: String,
    lifetime_years: String,
}

fn assemble(row: MainRow, tables: &SideTables) -> Result<PatentRecord> {
    let lifetime = if row.lifetime_years.eq_ignore_ascii_case("max") {
        Lifetime::Max
    } else {
        Lifetime::Years(row.lifetime_years.trim().parse::<u32>().map_err(|_| {
            Error::Invalid(format!(
                "lifetime_years {:?} is neither an integer nor \"max\"",
                row.lifetime_years
            ))
        })?)
    };
    let id = row.patent_id;
    Ok(PatentRecord {
        filing_date: row.filing_date,
        grant_date: row.grant_date,
        title: row.title,
        abstract_word_count: row.abstract_word_count,
        fulltext_word_count: row.fulltext_word_count,
        claims: tables.claims.get(&id).cloned().unwrap_or_default(),
        ipcs: split_list(&row.ipcs),
        assignees: tables.assignees.get(&id).cloned().unwrap_or_default(),
        inventors: tables.inventors.get(&id).cloned().unwrap_or_default(),
        backward_citations: tables.citations.get(&id).cloned().unwrap_or_default(),
        npl_citation_count: row.npl_citation_count,
        priorities: tables.priorities.get(&id).cloned().unwrap_or_default(),
        maintenance_events: tables.maintenance.get(&id).cloned().unwrap_or_default(),
        lifetime_years: lifetime,
        patent_id: id,
    })
}

fn split_list(cell: &str) -> Vec<String> {
    cell.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

macro_rules! side_reader {
    ($name:ident, $row:ty, $out:ty, $push:expr) => {
        fn $name(
            path: &Path,
            strict: bool,
            diagnostics: &mut Vec<RowDiagnostic>,
        ) -> Result<HashMap<String, Vec<$out>>> {
            let mut map: HashMap<String, Vec<$out>> = HashMap::new();
            if !path.exists() {
                return Ok(map);
            }
            let file_name = path.display().to_string();
            let mut reader = csv_reader(path)?;
            for (idx, row) in reader.deserialize::<$row>().enumerate() {
                match row {
                    Ok(r) => {
                        #[allow(clippy::redundant_closure_call)]
                        let (id, item) = ($push)(r);
                        map.entry(id).or_default().push(item);
                    }
                    Err(e) => {
                        if strict {
                            return Err(Error::MalformedRow {
                                file: file_name,
                                line: idx + 2,
                                message: e.to_string(),
                            });
                        }
                        diagnostics.push(RowDiagnostic {
                            file: file_name.clone(),
                            line: idx + 2,
                            message: e.to_string(),
                        });
                    }
                }
            }
            Ok(map)
        }
    };
}

#[derive(serde::Deserialize)]
struct ClaimRow {
    patent_id: String,
    is_independent: bool,
    word_count: u32,
}

side_reader!(read_claims, ClaimRow, Claim, |r: ClaimRow| (
    r.patent_id,
    Claim {
        is_independent: r.is_independent,
        word_count: r.word_count,
    }
));

#[derive(serde::Deserialize)]
struct CitationRow {
    patent_id: String,
    cited_id: String,
    cited_country: String,
    cited_filing_date: Option<NaiveDate>,
    cited_ipcs: Option<String>,
    cited_title: Option<String>,
}

side_reader!(read_citations, CitationRow, CitationRef, |r: CitationRow| {
    let ipcs = r
        .cited_ipcs
        .as_deref()
        .map(split_list)
        .filter(|v| !v.is_empty());
    (
        r.patent_id,
        CitationRef {
            cited_id: r.cited_id,
            cited_country: r.cited_country,
            cited_filing_date: r.cited_filing_date,
            cited_ipcs: ipcs,
            cited_title: r.cited_title.filter(|t| !t.trim().is_empty()),
        },
    )
});

#[derive(serde::Deserialize)]
struct PriorityRow {
    patent_id: String,
    priority_id: String,
    country: String,
}

side_reader!(read_priorities, PriorityRow, PriorityRef, |r: PriorityRow| (
    r.patent_id,
    PriorityRef {
        priority_id: r.priority_id,
        country: r.country,
    }
));

#[derive(serde::Deserialize)]
struct MaintenanceRow {
    patent_id: String,
    event_year_offset: u8,
    paid: bool,
    surcharge: bool,
}

side_reader!(
    read_maintenance,
    MaintenanceRow,
    MaintenanceEvent,
    |r: MaintenanceRow| (
        r.patent_id,
        MaintenanceEvent {
            event_year_offset: r.event_year_offset,
            paid: r.paid,
            surcharge: r.surcharge,
        }
    )
);

#[derive(serde::Deserialize)]
struct PartyRow {
    patent_id: String,
    role: String,
    name: String,
    country: String,
    overdue_fee_count: Option<u32>,
}

fn read_parties(
    path: &Path,
    strict: bool,
    diagnostics: &mut Vec<RowDiagnostic>,
    tables: &mut SideTables,
) -> Result<()> {
    if !path.exists() {
        return Ok(());
    }
    let file_name = path.display().to_string();
    let mut reader = csv_reader(path)?;
    for (idx, row) in reader.deserialize::<PartyRow>().enumerate() {
        let lineno = idx + 2;
        let parsed = row.map_err(|e| e.to_string()).and_then(|r| {
            let party = Party {
                name: r.name,
                country: r.country,
                overdue_fee_count: r.overdue_fee_count,
            };
            match r.role.as_str() {
                "assignee" => Ok((r.patent_id, party, true)),
                "inventor" => Ok((r.patent_id, party, false)),
                other => Err(format!("unknown party role {other:?}")),
            }
        });
        match parsed {
            Ok((id, party, is_assignee)) => {
                let map = if is_assignee {
                    &mut tables.assignees
                } else {
                    &mut tables.inventors
                };
                map.entry(id).or_default().push(party);
            }
            Err(message) => {
                if strict {
                    return Err(Error::MalformedRow {
                        file: file_name,
                        line: lineno,
                        message,
                    });
                }
                diagnostics.push(RowDiagnostic {
                    file: file_name.clone(),
                    line: lineno,
                    message,
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record_json(id: &str, lifetime: &str) -> String {
        format!(
            concat!(
                "{{\"patent_id\":\"{id}\",\"filing_date\":\"2000-01-01\",",
                "\"grant_date\":\"2001-01-01\",\"title\":\"widget\",",
                "\"abstract_word_count\":10,\"fulltext_word_count\":100,",
                "\"claims\":[{{\"is_independent\":true,\"word_count\":12}}],",
                "\"ipcs\":[\"H01L21/02\"],\"assignees\":[{{\"name\":\"Acme\",\"country\":\"US\"}}],",
                "\"inventors\":[],\"backward_citations\":[],\"npl_citation_count\":0,",
                "\"priorities\":[],\"maintenance_events\":[],\"lifetime_years\":{lifetime}}}"
            ),
            id = id,
            lifetime = lifetime
        )
    }

    fn write_jsonl(lines: &[String]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for line in lines {
            writeln!(f, "{line}").unwrap();
        }
        f
    }

    #[test]
    fn three_valid_rows_parse_cleanly() {
        let f = write_jsonl(&[
            record_json("P1", "4"),
            record_json("P2", "\"max\""),
            record_json("P3", "8"),
        ]);
        let out = parse_corpus(f.path(), CorpusFormat::Jsonl, false).unwrap();
        assert_eq!(out.records.len(), 3);
        assert!(out.diagnostics.is_empty());
        assert_eq!(out.records[0].patent_id, "P1");
        assert_eq!(out.records[1].lifetime_years, Lifetime::Max);
    }

    #[test]
    fn missing_grant_date_is_reported_with_line() {
        let bad = record_json("P2", "4").replace("\"grant_date\":\"2001-01-01\",", "");
        let f = write_jsonl(&[record_json("P1", "4"), bad, record_json("P3", "4")]);
        let out = parse_corpus(f.path(), CorpusFormat::Jsonl, false).unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.diagnostics.len(), 1);
        assert_eq!(out.diagnostics[0].line, 2);
        assert!(out.diagnostics[0].message.contains("grant_date"));
    }

    #[test]
    fn strict_mode_turns_diagnostics_fatal() {
        let bad = record_json("P2", "4").replace("\"grant_date\":\"2001-01-01\",", "");
        let f = write_jsonl(&[record_json("P1", "4"), bad]);
        let err = parse_corpus(f.path(), CorpusFormat::Jsonl, true).unwrap_err();
        assert!(matches!(err, Error::MalformedRow { line: 2, .. }));
    }

    #[test]
    fn duplicate_ids_are_fatal() {
        let mut lines: Vec<String> = (0..8).map(|i| record_json(&format!("P{i}"), "4")).collect();
        lines.push(record_json("P3", "4"));
        lines.push(record_json("P5", "4"));
        let f = write_jsonl(&lines);
        let err = parse_corpus(f.path(), CorpusFormat::Jsonl, false).unwrap_err();
        assert!(matches!(err, Error::DuplicateId { .. }));
    }

    #[test]
    fn canonical_emission_round_trips() {
        let f = write_jsonl(&[
            record_json("P2", "\"max\""),
            record_json("P1", "4"),
            record_json("P3", "12"),
        ]);
        let parsed = parse_corpus(f.path(), CorpusFormat::Jsonl, false).unwrap();
        let mut buf = Vec::new();
        emit_canonical(&parsed.records, &mut buf).unwrap();
        let mut f2 = tempfile::NamedTempFile::new().unwrap();
        f2.write_all(&buf).unwrap();
        let reparsed = parse_corpus(f2.path(), CorpusFormat::Jsonl, false).unwrap();
        assert_eq!(reparsed.records.len(), 3);
        // sorted by id, contents preserved
        assert_eq!(reparsed.records[0].patent_id, "P1");
        let mut original = parsed.records.clone();
        original.sort_by(|a, b| a.patent_id.cmp(&b.patent_id));
        assert_eq!(original, reparsed.records);
        // emission is byte-stable
        let mut buf2 = Vec::new();
        emit_canonical(&reparsed.records, &mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn csv_bundle_parses_and_matches_jsonl_shape() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join("main.csv"),
            "patent_id,filing_date,grant_date,title,abstract_word_count,fulltext_word_count,npl_citation_count,ipcs,lifetime_years\n\
             P1,2000-01-01,2001-01-01,widget,10,100,2,H01L21/02;G06F17/30,max\n",
        )
        .unwrap();
        fs::write(
            dir.path().join("claims.csv"),
            "patent_id,is_independent,word_count\nP1,true,12\nP1,false,5\n",
        )
        .unwrap();
        fs::write(
            dir.path().join("citations.csv"),
            "patent_id,cited_id,cited_country,cited_filing_date,cited_ipcs,cited_title\n\
             P1,C1,US,1999-05-01,H01L21/00,prior widget\nP1,C2,JP,,,\n",
        )
        .unwrap();
        fs::write(
            dir.path().join("parties.csv"),
            "patent_id,role,name,country,overdue_fee_count\n\
             P1,assignee,Acme Corp,US,2\nP1,inventor,Alice Kim,KR,\n",
        )
        .unwrap();
        fs::write(
            dir.path().join("priorities.csv"),
            "patent_id,priority_id,country\nP1,PR1,KR\n",
        )
        .unwrap();
        fs::write(
            dir.path().join("maintenance.csv"),
            "patent_id,event_year_offset,paid,surcharge\nP1,4,true,false\n",
        )
        .unwrap();

        let out = parse_corpus(dir.path(), CorpusFormat::CsvBundle, false).unwrap();
        assert!(out.diagnostics.is_empty(), "{:?}", out.diagnostics);
        assert_eq!(out.records.len(), 1);
        let r = &out.records[0];
        assert_eq!(r.claims.len(), 2);
        assert_eq!(r.ipcs, vec!["H01L21/02", "G06F17/30"]);
        assert_eq!(r.backward_citations.len(), 2);
        assert_eq!(r.backward_citations[1].cited_ipcs, None);
        assert_eq!(r.assignees[0].overdue_fee_count, Some(2));
        assert_eq!(r.inventors[0].overdue_fee_count, None);
        assert_eq!(r.lifetime_years, Lifetime::Max);
    }
}
