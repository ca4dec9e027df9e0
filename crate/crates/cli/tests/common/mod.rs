//! Shared test helpers: a seeded synthetic patent corpus with the class
//! signal planted on two indicators, and a runner for the `patval` binary.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

// used by the acceptance target only
#[allow(dead_code)]
pub const PLANTED: [&str; 2] = ["PK_1", "CP_5"];

const SUBCLASS_POOL: [&str; 10] = [
    "H01L21", "H01L29", "H01L33", "G06F17", "G06F15", "H01S5", "G11C11", "H03K19", "B82Y10",
    "C23C16",
];
const COUNTRY_POOL: [&str; 6] = ["US", "JP", "KR", "DE", "TW", "CN"];
const WORD_POOL: [&str; 24] = [
    "semiconductor", "memory", "device", "wafer", "circuit", "gate", "oxide", "layer",
    "transistor", "substrate", "etching", "deposition", "photoresist", "interconnect", "cell",
    "array", "controller", "sensor", "module", "package", "diode", "laser", "logic", "driver",
];

fn pick<'a, R: Rng>(rng: &mut R, pool: &[&'a str]) -> &'a str {
    pool[rng.gen_range(0..pool.len())]
}

fn title<R: Rng>(rng: &mut R) -> String {
    let n = rng.gen_range(3..7);
    (0..n)
        .map(|_| pick(rng, &WORD_POOL))
        .collect::<Vec<_>>()
        .join(" ")
}

fn date_string(epoch_day: i64) -> String {
    // epoch_day counted from 1998-01-01; crude but valid calendar walk
    let mut remaining = epoch_day;
    let mut year = 1998;
    loop {
        let leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
        let days = if leap { 366 } else { 365 };
        if remaining < days {
            break;
        }
        remaining -= days;
        year += 1;
    }
    let leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    let month_days = [
        31,
        if leap { 29 } else { 28 },
        31,
        30,
        31,
        30,
        31,
        31,
        30,
        31,
        30,
        31,
    ];
    let mut month = 1;
    for md in month_days {
        if remaining < md {
            break;
        }
        remaining -= md;
        month += 1;
    }
    format!("{year:04}-{month:02}-{:02}", remaining + 1)
}

fn record_json<R: Rng>(rng: &mut R, id: usize, valuable: bool) -> String {
    // planted signal: PK_1 (npl citations) and CP_5 (abstract words).
    // the per-feature distributions overlap, so neither feature separates
    // the classes alone but together they nearly do.
    let npl: i64 = if valuable {
        rng.gen_range(15..=35)
    } else {
        rng.gen_range(0..=20)
    };
    let abstract_words: i64 = if valuable {
        rng.gen_range(120..=180)
    } else {
        rng.gen_range(75..=135)
    };

    let filing_day = rng.gen_range(0..6000i64);
    let grant_day = filing_day + rng.gen_range(200..1200);
    let n_claims = rng.gen_range(1..15);
    let claims: Vec<String> = (0..n_claims)
        .map(|c| {
            format!(
                "{{\"is_independent\":{},\"word_count\":{}}}",
                c == 0 || rng.gen_bool(0.3),
                rng.gen_range(20..300)
            )
        })
        .collect();
    let n_ipcs = rng.gen_range(1..4);
    let ipcs: Vec<String> = (0..n_ipcs)
        .map(|_| format!("\"{}/{:02}\"", pick(rng, &SUBCLASS_POOL), rng.gen_range(1..99)))
        .collect();
    let n_assignees = rng.gen_range(1..3);
    let assignees: Vec<String> = (0..n_assignees)
        .map(|_| {
            format!(
                "{{\"name\":\"Company {:02}\",\"country\":\"{}\",\"overdue_fee_count\":{}}}",
                rng.gen_range(0..40),
                pick(rng, &COUNTRY_POOL),
                rng.gen_range(0..4)
            )
        })
        .collect();
    let n_inventors = rng.gen_range(1..4);
    let inventors: Vec<String> = (0..n_inventors)
        .map(|_| {
            format!(
                "{{\"name\":\"Inventor {:03}\",\"country\":\"{}\"}}",
                rng.gen_range(0..120),
                pick(rng, &COUNTRY_POOL)
            )
        })
        .collect();
    let n_citations = rng.gen_range(0..6);
    let citations: Vec<String> = (0..n_citations)
        .map(|c| {
            let cited_filing = (filing_day - rng.gen_range(100..3000)).max(0);
            let with_ipcs = rng.gen_bool(0.8);
            let ipcs_part = if with_ipcs {
                format!(
                    ",\"cited_ipcs\":[\"{}/{:02}\"]",
                    pick(rng, &SUBCLASS_POOL),
                    rng.gen_range(1..99)
                )
            } else {
                String::new()
            };
            let title_part = if rng.gen_bool(0.7) {
                format!(",\"cited_title\":\"{}\"", title(rng))
            } else {
                String::new()
            };
            format!(
                "{{\"cited_id\":\"X{id}c{c}\",\"cited_country\":\"{}\",\
                 \"cited_filing_date\":\"{}\"{}{}}}",
                pick(rng, &COUNTRY_POOL),
                date_string(cited_filing),
                ipcs_part,
                title_part
            )
        })
        .collect();
    let n_priorities = rng.gen_range(0..3);
    let priorities: Vec<String> = (0..n_priorities)
        .map(|p| {
            format!(
                "{{\"priority_id\":\"PR{id}-{p}\",\"country\":\"{}\"}}",
                pick(rng, &COUNTRY_POOL)
            )
        })
        .collect();
    let (maintenance, lifetime) = if valuable {
        (
            "[{\"event_year_offset\":4,\"paid\":true,\"surcharge\":false},\
              {\"event_year_offset\":8,\"paid\":true,\"surcharge\":false},\
              {\"event_year_offset\":12,\"paid\":true,\"surcharge\":false}]"
                .to_string(),
            "\"max\"".to_string(),
        )
    } else {
        (
            "[{\"event_year_offset\":4,\"paid\":false,\"surcharge\":false}]".to_string(),
            "4".to_string(),
        )
    };

    format!(
        "{{\"patent_id\":\"SYN{id:05}\",\"filing_date\":\"{}\",\"grant_date\":\"{}\",\
         \"title\":\"{}\",\"abstract_word_count\":{abstract_words},\
         \"fulltext_word_count\":{},\"claims\":[{}],\"ipcs\":[{}],\
         \"assignees\":[{}],\"inventors\":[{}],\"backward_citations\":[{}],\
         \"npl_citation_count\":{npl},\"priorities\":[{}],\
         \"maintenance_events\":{maintenance},\"lifetime_years\":{lifetime}}}",
        date_string(filing_day),
        date_string(grant_day),
        title(rng),
        rng.gen_range(500..8000),
        claims.join(","),
        ipcs.join(","),
        assignees.join(","),
        inventors.join(","),
        citations.join(","),
        priorities.join(","),
    )
}

/// Write a synthetic corpus with `n_vp` maximum-lifetime and `n_nvp`
/// lapsed patents, VP and NVP rows interleaved deterministically.
pub fn write_synth_corpus(path: &Path, n_vp: usize, n_nvp: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = n_vp + n_nvp;
    let mut lines = Vec::with_capacity(total);
    let mut remaining_vp = n_vp;
    let mut remaining_nvp = n_nvp;
    for id in 0..total {
        let valuable = if remaining_nvp == 0 {
            true
        } else if remaining_vp == 0 {
            false
        } else {
            rng.gen_bool(remaining_vp as f64 / (remaining_vp + remaining_nvp) as f64)
        };
        if valuable {
            remaining_vp -= 1;
        } else {
            remaining_nvp -= 1;
        }
        lines.push(record_json(&mut rng, id, valuable));
    }
    std::fs::write(path, lines.join("\n") + "\n").unwrap();
}

pub fn patval_bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_patval"))
}

/// Run one subcommand against a config and output directory.
pub fn run_stage(stage: &str, config: &Path, out: &Path) -> Output {
    Command::new(patval_bin())
        .args([
            stage,
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .expect("spawning patval")
}

pub fn assert_ok(output: &Output, what: &str) {
    assert!(
        output.status.success(),
        "{what} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

/// Recursively collect relative paths and byte contents of a directory.
pub fn dir_snapshot(root: &Path) -> std::collections::BTreeMap<String, Vec<u8>> {
    let mut out = std::collections::BTreeMap::new();
    fn walk(
        root: &Path,
        dir: &Path,
        out: &mut std::collections::BTreeMap<String, Vec<u8>>,
    ) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let entry = entry.unwrap();
            let path = entry.path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_str().unwrap().to_string();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    walk(root, root, &mut out);
    out
}
