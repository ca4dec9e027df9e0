//! `train-eval`: run the model grid through stratified k-fold CV with
//! per-fold undersampling and emit the candidate metric table plus
//! reliability bins.

use super::{fmt_num, write_csv_file, StageContext};
use crate::manifest::{persist_config, write_json, write_stage_manifest, StageManifest};
use anyhow::{bail, Context, Result};
use patval::evalcal::CvOptions;
use patval::indicators::read_matrix_csv;
use patval::screening::run_grid;
use patval::seed;
use std::collections::BTreeMap;

pub fn cmd_train_eval(ctx: &StageContext) -> Result<()> {
    let config = &ctx.config;
    let config_hash = persist_config(&ctx.out_dir, config)?;

    let matrix_path = ctx.out_dir.join("feature_matrix.csv");
    if !matrix_path.exists() {
        bail!(
            "missing {}; run the extract stage first",
            matrix_path.display()
        );
    }
    let matrix = read_matrix_csv(&matrix_path)?;

    let grid = config.grid_entries();
    let opts = CvOptions {
        k: config.cv.k,
        seed: seed::derive(config.seed, "cv/folds"),
        resample: config.cv.resample,
        m_bins: config.cv.ece_bins,
        threshold: config.cv.threshold,
    };
    let report = run_grid(&grid, &matrix, &opts)
        .with_context(|| format!("running the {}-entry grid", grid.len()))?;
    for failure in &report.failures {
        eprintln!("warning: grid entry {} failed: {}", failure.id, failure.error);
    }

    let mut files = vec!["candidates.csv".to_string(), "candidates/index.json".to_string()];

    write_csv_file(&ctx.out_dir, "candidates.csv", |w| {
        w.write_record([
            "spec_id",
            "family",
            "hyperparameters",
            "accuracy",
            "precision",
            "recall",
            "f1",
            "youdens_j",
            "mcc",
            "ece",
        ])?;
        for c in &report.candidates {
            let m = &c.cv.mean;
            w.write_record(&[
                c.id.clone(),
                c.spec.family_name().to_string(),
                c.spec.describe(),
                fmt_num(m.accuracy),
                fmt_num(m.precision),
                fmt_num(m.recall),
                fmt_num(m.f1),
                fmt_num(m.youdens_j),
                fmt_num(m.mcc),
                fmt_num(m.ece),
            ])?;
        }
        Ok(())
    })?;

    for c in &report.candidates {
        let cv_rel = format!("candidates/{}.cv.json", c.id);
        write_json(&ctx.out_dir, &cv_rel, &c.cv)?;
        files.push(cv_rel);

        let bins_rel = format!("candidates/{}.reliability.csv", c.id);
        write_csv_file(&ctx.out_dir, &bins_rel, |w| {
            w.write_record([
                "fold",
                "lower",
                "upper",
                "count",
                "mean_confidence",
                "positive_fraction",
            ])?;
            for (fold, metrics) in c.cv.folds.iter().enumerate() {
                for bin in &metrics.bins {
                    w.write_record(&[
                        fold.to_string(),
                        fmt_num(bin.lower),
                        fmt_num(bin.upper),
                        bin.count.to_string(),
                        fmt_num(bin.mean_confidence),
                        fmt_num(bin.positive_fraction),
                    ])?;
                }
            }
            Ok(())
        })?;
        files.push(bins_rel);
    }

    write_json(&ctx.out_dir, "candidates/index.json", &report)?;
    if !report.failures.is_empty() {
        write_json(&ctx.out_dir, "grid_failures.json", &report.failures)?;
        files.push("grid_failures.json".to_string());
    }

    let mut items = BTreeMap::new();
    items.insert("grid_entries".to_string(), grid.len() as u64);
    items.insert("candidates".to_string(), report.candidates.len() as u64);
    items.insert("failures".to_string(), report.failures.len() as u64);
    items.insert("folds".to_string(), config.cv.k as u64);
    write_stage_manifest(
        &ctx.out_dir,
        &StageManifest {
            stage: "train_eval".to_string(),
            config_hash,
            artifact_version: crate::manifest::artifact_version(),
            files,
            items,
            warnings: report
                .failures
                .iter()
                .map(|f| format!("grid entry {} failed: {}", f.id, f.error))
                .collect(),
        },
    )?;
    eprintln!(
        "train-eval: {} candidates evaluated over {} folds ({} failures)",
        report.candidates.len(),
        config.cv.k,
        report.failures.len()
    );
    Ok(())
}
