//! Benchmarks for the data-parallel kernels. Build once with the default
//! `parallel` feature and once with `--no-default-features` to compare the
//! rayon and sequential paths; the mode is part of each benchmark name.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use patval::attribution::{sampled_shapley, BackgroundSet};
use patval::evalcal::{cross_validate, CvOptions};
use patval::indicators::FeatureMatrix;
use patval::models::{FamilyParams, ForestParams, LogisticParams, ModelSpec};
use patval::resampling::{find_tomek_links, DistanceMetric};
use rand::Rng;

const MODE: &str = if cfg!(feature = "parallel") { "par" } else { "seq" };

fn random_rows(n: usize, d: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<bool>) {
    let mut rng = patval::seed::rng(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    let labels: Vec<bool> = rows
        .iter()
        .map(|r| r[0] + 0.5 * r[1] + 0.1 * rng.gen_range(-1.0..1.0) > 0.0)
        .collect();
    (rows, labels)
}

fn bench_tomek(c: &mut Criterion) {
    let (rows, labels) = random_rows(400, 20, 1);
    c.bench_function(&format!("tomek_links/400x20/{MODE}"), |b| {
        b.iter(|| find_tomek_links(&rows, &labels, DistanceMetric::Euclidean).unwrap())
    });
}

fn bench_forest(c: &mut Criterion) {
    let (rows, labels) = random_rows(500, 20, 2);
    let label_floats: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();
    let spec = ModelSpec {
        seed: 3,
        params: FamilyParams::Rf(ForestParams {
            n_trees: 20,
            max_depth: 8,
            min_leaf: 1,
            features_per_split: None,
        }),
    };
    c.bench_function(&format!("random_forest/500x20x20trees/{MODE}"), |b| {
        b.iter(|| patval::models::train(&spec, &rows, &label_floats).unwrap())
    });
}

fn bench_cross_validate(c: &mut Criterion) {
    let (rows, labels) = random_rows(400, 20, 4);
    let matrix = FeatureMatrix {
        feature_names: (0..20).map(|i| format!("f{i}")).collect(),
        patent_ids: (0..400).map(|i| format!("P{i:04}")).collect(),
        rows,
        labels,
    };
    let spec = ModelSpec {
        seed: 5,
        params: FamilyParams::Lr(LogisticParams {
            epochs: 30,
            ..LogisticParams::default()
        }),
    };
    let opts = CvOptions {
        k: 5,
        seed: 6,
        resample: true,
        ..CvOptions::default()
    };
    c.bench_function(&format!("cross_validate/lr_k5_400x20/{MODE}"), |b| {
        b.iter_batched(
            || (),
            |()| cross_validate(&spec, &matrix, &opts).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn bench_shapley(c: &mut Criterion) {
    let (rows, _) = random_rows(60, 20, 7);
    let background = BackgroundSet::new(rows[..40].to_vec()).unwrap();
    let x = rows[50].clone();
    let model = |batch: &[Vec<f64>]| -> Vec<f64> {
        batch
            .iter()
            .map(|r| {
                let z: f64 = r.iter().enumerate().map(|(i, v)| v * 0.1 * (i as f64 + 1.0)).sum();
                1.0 / (1.0 + (-z).exp())
            })
            .collect()
    };
    c.bench_function(&format!("sampled_shapley/20feat_50perm/{MODE}"), |b| {
        b.iter(|| sampled_shapley(&model, "x", &x, &background, 50, 8).unwrap())
    });
}

criterion_group! {
    name = kernels;
    config = Criterion::default().sample_size(10);
    targets = bench_tomek, bench_forest, bench_cross_validate, bench_shapley
}
criterion_main!(kernels);
