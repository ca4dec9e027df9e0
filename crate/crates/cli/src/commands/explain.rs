//! `explain`: Shapley attributions for the selected model over the labeled
//! matrix, with a global summary and five confidence-bin rankings.

use super::{fmt_num, write_csv_file, StageContext};
use crate::config::AttributionMode;
use crate::manifest::{persist_config, write_json, write_stage_manifest, StageManifest};
use anyhow::{bail, Context, Result};
use patval::attribution::{
    bin_attributions, exact_shapley, global_summary, sampled_shapley, write_attributions_csv,
    Attribution, BackgroundSet,
};
use patval::indicators::read_matrix_csv;
use patval::models::load_model;
use patval::seed;
use rand::seq::SliceRandom;
use std::collections::BTreeMap;
use std::fs;

const BIN_EDGES: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

pub fn cmd_explain(ctx: &StageContext) -> Result<()> {
    let config = &ctx.config;
    let config_hash = persist_config(&ctx.out_dir, config)?;

    let model_path = ctx.out_dir.join("selected_model.json");
    if !model_path.exists() {
        bail!("missing {}; run pareto first", model_path.display());
    }
    let model = load_model(&model_path)?;
    let matrix = read_matrix_csv(&ctx.out_dir.join("feature_matrix.csv"))?;
    if matrix.width() != model.n_features {
        bail!(
            "matrix width {} does not match the selected model ({} features)",
            matrix.width(),
            model.n_features
        );
    }

    let att = &config.attribution;
    let explain_seed = seed::derive(config.seed, "explain");
    let background = BackgroundSet::sampled(&matrix.rows, att.background_size, explain_seed)?;

    // instance subset: seeded sample when a budget is configured
    let mut instance_rows: Vec<usize> = (0..matrix.n_rows()).collect();
    if let Some(budget) = att.instance_sample {
        if budget < instance_rows.len() {
            let mut rng = seed::rng(seed::derive(explain_seed, "instances"));
            instance_rows.shuffle(&mut rng);
            instance_rows.truncate(budget);
            instance_rows.sort_unstable();
        }
    }

    if att.mode == AttributionMode::Exact && matrix.width() > att.max_exact_features {
        bail!(
            "exact attribution over {} features exceeds the budget of {}; \
             set attribution.mode = \"sampled\"",
            matrix.width(),
            att.max_exact_features
        );
    }

    let attributions: Vec<Attribution> = instance_rows
        .iter()
        .map(|&row| {
            let id = &matrix.patent_ids[row];
            match att.mode {
                AttributionMode::Exact => exact_shapley(
                    &model,
                    id,
                    &matrix.rows[row],
                    &background,
                    att.max_exact_features,
                ),
                AttributionMode::Sampled => sampled_shapley(
                    &model,
                    id,
                    &matrix.rows[row],
                    &background,
                    att.n_permutations,
                    seed::derive(explain_seed, &format!("instance/{id}")),
                ),
            }
            .with_context(|| format!("attributing {id}"))
        })
        .collect::<Result<_>>()?;

    let values: Vec<Vec<f64>> = instance_rows.iter().map(|&r| matrix.rows[r].clone()).collect();

    let mut csv_bytes = Vec::new();
    write_attributions_csv(&attributions, &matrix.feature_names, &mut csv_bytes)?;
    fs::write(ctx.out_dir.join("attributions.csv"), csv_bytes)?;

    let global = global_summary(&attributions, &values, &matrix.feature_names)?;
    write_json(&ctx.out_dir, "attribution_global.json", &global.ranking)?;
    write_csv_file(&ctx.out_dir, "attribution_points.csv", |w| {
        w.write_record(["feature", "value_percentile", "phi"])?;
        for (feature, percentile, phi) in &global.points {
            w.write_record(&[feature.clone(), fmt_num(*percentile), fmt_num(*phi)])?;
        }
        Ok(())
    })?;

    let bins = bin_attributions(&attributions, &values, &matrix.feature_names, &BIN_EDGES)?;
    write_json(&ctx.out_dir, "bin_summaries.json", &bins)?;

    let mut items = BTreeMap::new();
    items.insert("instances".to_string(), attributions.len() as u64);
    items.insert("background_rows".to_string(), background.len() as u64);
    if att.mode == AttributionMode::Sampled {
        items.insert("permutations".to_string(), att.n_permutations as u64);
    }
    write_stage_manifest(
        &ctx.out_dir,
        &StageManifest {
            stage: "explain".to_string(),
            config_hash,
            artifact_version: crate::manifest::artifact_version(),
            files: vec![
                "attributions.csv".into(),
                "attribution_global.json".into(),
                "attribution_points.csv".into(),
                "bin_summaries.json".into(),
            ],
            items,
            warnings: Vec::new(),
        },
    )?;
    eprintln!(
        "explain: {} instances attributed against {} background rows",
        attributions.len(),
        background.len()
    );
    Ok(())
}
