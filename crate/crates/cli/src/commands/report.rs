//! `report`: verify all stage outputs against the stored config, then
//! consolidate metrics, front, and bin rankings into one report plus the
//! run manifest.

use super::{fmt_num, write_csv_file, StageContext};
use crate::config::sha256_hex;
use crate::manifest::{
    artifact_version, read_stage_manifest, verify_stage, write_json, RunManifest, CONFIG_COPY,
};
use anyhow::{bail, Context, Result};
use patval::attribution::BinSummary;
use patval::screening::GridReport;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;

const STAGES: [&str; 4] = ["extract", "train_eval", "pareto", "explain"];

#[derive(Serialize)]
struct MetricsRow {
    spec_id: String,
    family: String,
    accuracy: f64,
    precision: f64,
    recall: f64,
    f1: f64,
    youdens_j: f64,
    mcc: f64,
    ece: f64,
    on_front: bool,
    selected: bool,
}

pub fn cmd_report(ctx: &StageContext) -> Result<()> {
    let out = &ctx.out_dir;

    let stored = fs::read_to_string(out.join(CONFIG_COPY))
        .with_context(|| format!("missing stored config {CONFIG_COPY}; run extract first"))?;
    let effective = ctx.config.canonical_toml()?;
    if stored != effective {
        bail!("integrity: stored config differs from the supplied one");
    }
    let config_hash = sha256_hex(stored.as_bytes());

    let mut stages = BTreeMap::new();
    let mut missing = Vec::new();
    for stage in STAGES {
        match read_stage_manifest(out, stage) {
            Ok(manifest) => {
                verify_stage(out, &manifest, &config_hash)?;
                stages.insert(stage.to_string(), manifest);
            }
            Err(e) => missing.push(format!("{stage}: {e}")),
        }
    }
    if !missing.is_empty() {
        bail!("missing stage outputs:\n  {}", missing.join("\n  "));
    }

    let grid: GridReport =
        serde_json::from_str(&fs::read_to_string(out.join("candidates/index.json"))?)?;
    let pareto: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("pareto.json"))?)?;
    let selected: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("selected.json"))?)?;
    let label_counts: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("label_counts.json"))?)?;
    let bins: Vec<BinSummary> =
        serde_json::from_str(&fs::read_to_string(out.join("bin_summaries.json"))?)?;
    let global: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("attribution_global.json"))?)?;

    let front_ids: Vec<String> = pareto["front"]
        .as_array()
        .map(|a| {
            a.iter()
                .filter_map(|v| v.as_str().map(str::to_string))
                .collect()
        })
        .unwrap_or_default();
    let selected_id = selected["id"].as_str().unwrap_or_default().to_string();

    let rows: Vec<MetricsRow> = grid
        .candidates
        .iter()
        .map(|c| MetricsRow {
            spec_id: c.id.clone(),
            family: c.spec.family_name().to_string(),
            accuracy: c.cv.mean.accuracy,
            precision: c.cv.mean.precision,
            recall: c.cv.mean.recall,
            f1: c.cv.mean.f1,
            youdens_j: c.cv.mean.youdens_j,
            mcc: c.cv.mean.mcc,
            ece: c.cv.mean.ece,
            on_front: front_ids.contains(&c.id),
            selected: c.id == selected_id,
        })
        .collect();

    write_csv_file(out, "metrics_table.csv", |w| {
        w.write_record([
            "spec_id",
            "family",
            "accuracy",
            "precision",
            "recall",
            "f1",
            "youdens_j",
            "mcc",
            "ece",
            "on_front",
            "selected",
        ])?;
        for r in &rows {
            w.write_record(&[
                r.spec_id.clone(),
                r.family.clone(),
                fmt_num(r.accuracy),
                fmt_num(r.precision),
                fmt_num(r.recall),
                fmt_num(r.f1),
                fmt_num(r.youdens_j),
                fmt_num(r.mcc),
                fmt_num(r.ece),
                r.on_front.to_string(),
                r.selected.to_string(),
            ])?;
        }
        Ok(())
    })?;

    // top-10 per confidence bin, mirroring the rank-table layout
    let bin_ranks: Vec<serde_json::Value> = bins
        .iter()
        .map(|b| {
            serde_json::json!({
                "lower": b.lower,
                "upper": b.upper,
                "count": b.count,
                "empty": b.empty,
                "top_features": b.ranking.iter().take(10).map(|s| {
                    serde_json::json!({
                        "feature": s.feature,
                        "mean_abs_phi": s.mean_abs_phi,
                        "value_phi_correlation": s.value_phi_correlation,
                    })
                }).collect::<Vec<_>>(),
            })
        })
        .collect();

    write_json(
        out,
        "report.json",
        &serde_json::json!({
            "config_hash": config_hash,
            "artifact_version": artifact_version(),
            "label_counts": label_counts,
            "metrics_table": rows,
            "pareto": pareto,
            "selected": selected,
            "global_ranking": global,
            "bin_ranks": bin_ranks,
        }),
    )?;

    let mut files: Vec<String> = vec![CONFIG_COPY.to_string()];
    for stage in STAGES {
        files.push(format!("manifest/{stage}.json"));
        files.extend(stages[stage].files.iter().cloned());
    }
    files.push("metrics_table.csv".to_string());
    files.push("report.json".to_string());
    files.push("run_manifest.json".to_string());
    files.push("manifest/report.json".to_string());

    let warnings: Vec<String> = stages
        .values()
        .flat_map(|s| s.warnings.iter().cloned())
        .collect();

    let mut items = BTreeMap::new();
    items.insert("stages".to_string(), STAGES.len() as u64);
    items.insert("candidates".to_string(), rows.len() as u64);
    crate::manifest::write_stage_manifest(
        out,
        &crate::manifest::StageManifest {
            stage: "report".to_string(),
            config_hash: config_hash.clone(),
            artifact_version: artifact_version(),
            files: vec!["metrics_table.csv".into(), "report.json".into()],
            items,
            warnings: warnings.clone(),
        },
    )?;

    write_json(
        out,
        "run_manifest.json",
        &RunManifest {
            config_hash,
            artifact_version: artifact_version(),
            stages,
            files,
            warnings,
        },
    )?;
    eprintln!("report: consolidated {} candidates across {} stages", rows.len(), STAGES.len());
    Ok(())
}
