use std::collections::BTreeMap;
use std::hint::black_box;
use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, Criterion};
use cuisto::boost::{boost_features, train_boost};
use cuisto::corpus::load_corpus;
use cuisto::fusion::{fuse_electre, fuse_linear, normalize_scores};
use cuisto::{BoostConfig, ElectreParams, LabelKind, Normalizer, ScoreVector};

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

fn method_scores() -> Vec<ScoreVector> {
    let classes = ["dessert", "entree", "plat_principal"];
    (0..4)
        .map(|m| {
            let scores: BTreeMap<String, f64> = classes
                .iter()
                .enumerate()
                .map(|(i, c)| (c.to_string(), ((m * 7 + i * 3) % 5) as f64 + 0.25))
                .collect();
            ScoreVector::new("r", format!("m{m}"), scores)
        })
        .collect()
}

fn fusion(c: &mut Criterion) {
    let raw = method_scores();
    let normalized: Vec<ScoreVector> = raw.iter().map(normalize_scores).collect();
    let params = ElectreParams::uniform(0.6, 0.5);
    c.bench_function("normalize_4x3", |b| {
        b.iter(|| raw.iter().map(|v| normalize_scores(black_box(v))).count())
    });
    c.bench_function("fuse_linear_4x3", |b| b.iter(|| fuse_linear(black_box(&normalized)).unwrap()));
    c.bench_function("fuse_electre_4x3", |b| {
        b.iter(|| fuse_electre(black_box(&normalized), &params).unwrap())
    });
}

fn boosting(c: &mut Criterion) {
    let corpus = load_corpus(fixture("boost40.xml"), LabelKind::DishType).unwrap();
    let normalizer = Normalizer::default();
    let examples: Vec<_> = corpus
        .recipes()
        .iter()
        .map(|r| {
            let ingr = r.gold_ingredients.as_deref().unwrap_or(&[]);
            (boost_features(r, ingr, &normalizer, Default::default()), corpus.label_of(r).unwrap())
        })
        .collect();
    let config = BoostConfig {
        max_rounds: 50,
        smoothing_epsilon: None,
        dev_patience: 50,
    };
    c.bench_function("train_boost_40x50", |b| {
        b.iter(|| train_boost(black_box(&examples), &[], &config).unwrap())
    });
}

criterion_group!(benches, fusion, boosting);
criterion_main!(benches);
