//! `extract`: parse and validate the corpus, derive labels, build the
//! index, compute the feature matrix, and emit the canonical corpus.

use super::StageContext;
use crate::manifest::{persist_config, write_json, write_stage_manifest, StageManifest};
use anyhow::{bail, Context, Result};
use patval::corpus::{
    build_index, derive_label, emit_canonical, parse_corpus, Label,
};
use patval::indicators::{compute_all, write_matrix_csv};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;

#[derive(Serialize)]
struct LabelCounts {
    vp: usize,
    nvp: usize,
    excluded: usize,
}

#[derive(Serialize)]
struct ExtractDiagnostics<'a> {
    diagnostics: &'a [patval::corpus::RowDiagnostic],
    warnings: &'a [String],
}

pub fn cmd_extract(ctx: &StageContext) -> Result<()> {
    let config = &ctx.config;
    let config_hash = persist_config(&ctx.out_dir, config)?;

    let outcome = parse_corpus(&config.corpus.path, config.corpus.format, ctx.strict)
        .with_context(|| format!("parsing corpus {}", config.corpus.path.display()))?;
    if outcome.records.is_empty() {
        bail!("empty corpus: {} yielded no records", config.corpus.path.display());
    }
    for d in &outcome.diagnostics {
        eprintln!("warning: {}:{}: {}", d.file, d.line, d.message);
    }

    let mut canonical = Vec::new();
    emit_canonical(&outcome.records, &mut canonical)?;
    fs::write(ctx.out_dir.join("corpus.canonical.jsonl"), canonical)?;

    let policy = config.label_policy();
    let mut counts = LabelCounts {
        vp: 0,
        nvp: 0,
        excluded: 0,
    };
    for record in &outcome.records {
        match derive_label(record, policy) {
            Label::Vp => counts.vp += 1,
            Label::Nvp => counts.nvp += 1,
            Label::Excluded => counts.excluded += 1,
        }
    }

    let index = build_index(&outcome.records, config.field.ipc_level)?;
    let field_config = config.field_config();
    let (matrix, warnings) = compute_all(&outcome.records, &index, &field_config, policy)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }

    let mut matrix_bytes = Vec::new();
    write_matrix_csv(&matrix, &mut matrix_bytes)?;
    fs::write(ctx.out_dir.join("feature_matrix.csv"), matrix_bytes)?;

    write_json(&ctx.out_dir, "label_counts.json", &counts)?;
    write_json(
        &ctx.out_dir,
        "extract_diagnostics.json",
        &ExtractDiagnostics {
            diagnostics: &outcome.diagnostics,
            warnings: &warnings,
        },
    )?;

    let mut items = BTreeMap::new();
    items.insert("records".to_string(), outcome.records.len() as u64);
    items.insert("labeled_rows".to_string(), matrix.n_rows() as u64);
    items.insert("diagnostics".to_string(), outcome.diagnostics.len() as u64);
    write_stage_manifest(
        &ctx.out_dir,
        &StageManifest {
            stage: "extract".to_string(),
            config_hash,
            artifact_version: crate::manifest::artifact_version(),
            files: vec![
                "corpus.canonical.jsonl".into(),
                "feature_matrix.csv".into(),
                "label_counts.json".into(),
                "extract_diagnostics.json".into(),
            ],
            items,
            warnings,
        },
    )?;
    eprintln!(
        "extract: {} records -> {} labeled rows ({} VP / {} NVP / {} excluded)",
        outcome.records.len(),
        matrix.n_rows(),
        counts.vp,
        counts.nvp,
        counts.excluded
    );
    Ok(())
}
