//! Library trainers and scorers against the dense reference implementations.

use std::collections::BTreeMap;
use std::path::PathBuf;

use cuisto::boost::{boost_features, train_boost};
use cuisto::corpus::load_corpus;
use cuisto::cosine::train_cosine;
use cuisto::features::{build_stats, recipe_terms, tfidf_vector};
use cuisto::svm::{epoch_orders, train_ovo};
use cuisto::{BoostConfig, BoostModel, Corpus, DenominatorMode, Feed, LabelKind, LexiconStats, Normalizer, OvoModel, SvmConfig};
use cuisto_oracle as oracle;

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

fn synthetic(kind: LabelKind) -> (Corpus, Normalizer, LexiconStats) {
    let train = load_corpus(fixture("synthetic/train.xml"), kind).unwrap();
    let normalizer = Normalizer::default();
    let stats = build_stats(&train, &train, &normalizer, Feed::TitleAndBody).unwrap();
    (train, normalizer, stats)
}

/// The library keeps weights as `scale * v`, so rounding differs from the
/// dense update; with a small lambda the weights reach the thousands.
fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs().max(1.0)
}

fn dense(v: &cuisto::SparseVector) -> BTreeMap<String, f64> {
    v.iter().map(|(t, w)| (t.to_owned(), w)).collect()
}

#[test]
fn svm_matches_dense_pegasos() {
    for kind in [LabelKind::DishType, LabelKind::Difficulty] {
        let (train, normalizer, stats) = synthetic(kind);
        let config = SvmConfig {
            seed: 3,
            epochs: 4,
            ..SvmConfig::default()
        };
        let model = train_ovo(&train, &stats, &normalizer, &config, None).unwrap();
        let vectors: Vec<(BTreeMap<String, f64>, String)> = train
            .recipes()
            .iter()
            .map(|r| {
                let x = tfidf_vector(&recipe_terms(r, &normalizer, Feed::TitleAndBody), &stats);
                (dense(&x), train.label_of(r).unwrap().to_owned())
            })
            .collect();
        let reference = oracle::train_ovo(&vectors, config.lambda, |pair, n| {
            epoch_orders(config.seed, pair, n, config.epochs)
        });
        assert_eq!(model.classes(), reference.classes.as_slice());
        for (p, (a, b, w, bias)) in model.pairs().iter().zip(&reference.pairs) {
            assert_eq!((&p.first, &p.second), (a, b));
            assert!(near(p.bias, *bias), "bias {} vs {bias}", p.bias);
            for (t, x) in p.weights.iter() {
                let y = w.get(t).copied().unwrap_or(0.0);
                assert!(near(x, y), "{a}/{b} {t}: {x} vs {y}");
            }
        }
        for (x, _) in &vectors {
            let sparse = x.iter().map(|(t, w)| (t.clone(), *w)).collect();
            let mine = model.score_vector("r", &sparse);
            for (c, s) in reference.scores(x) {
                assert!(near(mine.scores[&c], s), "{c}: {} vs {s}", mine.scores[&c]);
            }
        }
        let reread = OvoModel::from_text(&model.to_text()).unwrap();
        assert_eq!(reread.to_text(), model.to_text());
    }
}

#[test]
fn cosine_matches_reference_in_both_modes() {
    let (train, normalizer, stats) = synthetic(LabelKind::DishType);
    for mode in [DenominatorMode::Standard, DenominatorMode::Literal] {
        let model = train_cosine(&stats, 0.45, mode, &[]).unwrap();
        for r in train.recipes() {
            let counts = recipe_terms(r, &normalizer, Feed::TitleAndBody);
            let x = dense(&model.recipe_vector(&counts));
            let scores = model.score_counts(&r.id, &counts);
            for c in model.classes() {
                let want = oracle::cosine(&x, &dense(model.class_vector(c).unwrap()), mode == DenominatorMode::Literal);
                assert!((scores.scores[c] - want).abs() <= 1e-12, "{mode:?} {c}");
            }
        }
    }
}

#[test]
fn boost_round_trips_and_matches_reference_on_difficulty() {
    let corpus = load_corpus(fixture("boost40.xml"), LabelKind::Difficulty).unwrap();
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
        max_rounds: 30,
        smoothing_epsilon: None,
        dev_patience: 30,
    };
    let (model, _) = train_boost(&examples, &[], &config).unwrap();
    let docs: Vec<oracle::BoostDoc> = examples
        .iter()
        .map(|(f, l)| oracle::BoostDoc {
            keys: cuisto::boost::TextField::ALL
                .iter()
                .flat_map(|field| f.text(*field).iter().map(move |g| format!("{}:{g}", field.prefix())))
                .collect(),
            numeric: cuisto::features::NumericFeatures::NAMES
                .iter()
                .zip(f.numeric)
                .map(|(n, v)| (n.to_string(), v))
                .collect(),
            label: l.to_string(),
        })
        .collect();
    let reference = oracle::adaboost_mh(&docs, &[], 30, None, 30, cuisto::boost::TIE_TOLERANCE);
    let keys: Vec<String> = model.rounds().iter().map(|h| h.test.key()).collect();
    let want: Vec<String> = reference.rounds.iter().map(|r| r.key.clone()).collect();
    assert_eq!(keys, want);

    let reread = BoostModel::from_text(&model.to_text()).unwrap();
    for ((f, _), doc) in examples.iter().zip(&docs) {
        let a = reread.margins(f).unwrap();
        let b = reference.margins(doc);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-12);
        }
    }
}
