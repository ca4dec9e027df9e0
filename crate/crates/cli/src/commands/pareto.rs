//! `pareto`: screen candidates on (ECE min, MCC max) with the F1 floor,
//! pick one by the configured policy, and serialize it after a refit on
//! the full labeled matrix.

use super::{fmt_num, write_csv_file, StageContext};
use crate::manifest::{persist_config, write_json, write_stage_manifest, StageManifest};
use anyhow::{bail, Context, Result};
use patval::indicators::read_matrix_csv;
use patval::models::{self, apply_scaler, fit_scaler};
use patval::resampling::undersample;
use patval::screening::{pareto_front, select_best, GridReport};
use patval::seed;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;

#[derive(Serialize)]
struct SelectedInfo {
    id: String,
    policy: patval::screening::SelectionPolicy,
    summary: patval::screening::CandidateSummary,
    refit_rows: usize,
    refit_tomek_removed: usize,
    refit_seed: u64,
}

pub fn cmd_pareto(ctx: &StageContext) -> Result<()> {
    let config = &ctx.config;
    let config_hash = persist_config(&ctx.out_dir, config)?;

    let index_path = ctx.out_dir.join("candidates/index.json");
    if !index_path.exists() {
        bail!("missing {}; run train-eval first", index_path.display());
    }
    let report: GridReport = serde_json::from_str(&fs::read_to_string(&index_path)?)
        .with_context(|| format!("parsing {}", index_path.display()))?;

    let front = pareto_front(&report.candidates, config.screening.f1_floor)?;
    if let Some(w) = &front.warning {
        eprintln!("warning: {w}");
    }
    if front.members.is_empty() {
        bail!(
            "empty Pareto front: no candidate reached the F1 floor {}",
            config.screening.f1_floor
        );
    }

    write_json(&ctx.out_dir, "pareto.json", &serde_json::json!({
        "objective": "minimize ece, maximize mcc",
        "f1_floor": config.screening.f1_floor,
        "front": front.members.iter().map(|&i| &report.candidates[i].id).collect::<Vec<_>>(),
        "warning": front.warning,
    }))?;

    write_csv_file(&ctx.out_dir, "pareto.csv", |w| {
        w.write_record(["spec_id", "family", "f1", "mcc", "ece", "on_front"])?;
        for (i, c) in report.candidates.iter().enumerate() {
            w.write_record(&[
                c.id.clone(),
                c.spec.family_name().to_string(),
                fmt_num(c.summary.f1),
                fmt_num(c.summary.mcc),
                fmt_num(c.summary.ece),
                front.members.contains(&i).to_string(),
            ])?;
        }
        Ok(())
    })?;

    let selected = select_best(&front, &report.candidates, config.screening.selection_policy)?;

    // refit on the full labeled matrix (undersampled when configured) so
    // the serialized model saw every training row
    let matrix = read_matrix_csv(&ctx.out_dir.join("feature_matrix.csv"))?;
    let mut rows = matrix.rows.clone();
    let mut labels = matrix.label_floats();
    let mut removed = 0;
    let mut tomek_file = None;
    if config.cv.resample {
        let scaler = fit_scaler(&rows);
        let scaled = apply_scaler(&scaler, &rows);
        let (_, _, tomek) = undersample(&scaled, &matrix.labels)?;
        removed = tomek.removed.len();
        write_json(&ctx.out_dir, "tomek_report.json", &tomek)?;
        tomek_file = Some("tomek_report.json".to_string());
        let mut keep = vec![true; rows.len()];
        for &r in &tomek.removed {
            keep[r] = false;
        }
        rows = rows
            .into_iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(r, _)| r)
            .collect();
        labels = labels
            .into_iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(l, _)| l)
            .collect();
    }
    let mut refit_spec = selected.spec.clone();
    refit_spec.seed = seed::derive(config.seed, &format!("refit/{}", selected.id));
    let model = models::train(&refit_spec, &rows, &labels)?;

    let model_path = ctx.out_dir.join("selected_model.json");
    let mut bytes = Vec::new();
    models::save_model(&model, &mut bytes)?;
    fs::write(&model_path, bytes)?;

    write_json(
        &ctx.out_dir,
        "selected.json",
        &SelectedInfo {
            id: selected.id.clone(),
            policy: config.screening.selection_policy,
            summary: selected.summary,
            refit_rows: rows.len(),
            refit_tomek_removed: removed,
            refit_seed: refit_spec.seed,
        },
    )?;

    let mut items = BTreeMap::new();
    items.insert("candidates".to_string(), report.candidates.len() as u64);
    items.insert("front_size".to_string(), front.members.len() as u64);
    write_stage_manifest(
        &ctx.out_dir,
        &StageManifest {
            stage: "pareto".to_string(),
            config_hash,
            artifact_version: crate::manifest::artifact_version(),
            files: {
                let mut files = vec![
                    "pareto.json".to_string(),
                    "pareto.csv".into(),
                    "selected_model.json".into(),
                    "selected.json".into(),
                ];
                files.extend(tomek_file);
                files
            },
            items,
            warnings: front.warning.into_iter().collect(),
        },
    )?;
    eprintln!(
        "pareto: front of {} from {} candidates; selected {} by {:?}",
        front.members.len(),
        report.candidates.len(),
        selected.id,
        config.screening.selection_policy
    );
    Ok(())
}
