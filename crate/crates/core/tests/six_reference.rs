//! The six-recipe fixture against tables derived by an independent script
//! (fixtures/derive_six.py).

use std::collections::BTreeSet;
use std::path::PathBuf;

use cuisto::corpus::load_corpus;
use cuisto::extraction::build_lexicon;
use cuisto::features::{
    build_stats, gini_class_vector, gini_vocabulary, mutual_information_select, numeric_features,
    recipe_terms, tfidf_vector,
};
use cuisto::{Corpus, Feed, LabelKind, LexiconStats, NormConfig, Normalizer};

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

fn derived(name: &str) -> Vec<Vec<String>> {
    std::fs::read_to_string(fixture("derived").join(name))
        .unwrap()
        .lines()
        .map(|l| l.split('\t').map(str::to_owned).collect())
        .collect()
}

fn setup() -> (Corpus, Normalizer, LexiconStats) {
    let six = load_corpus(fixture("six.xml"), LabelKind::DishType).unwrap();
    let normalizer = Normalizer::default();
    let stats = build_stats(&six, &six, &normalizer, Feed::TitleAndBody).unwrap();
    (six, normalizer, stats)
}

fn assert_close(got: f64, want: f64, what: &str) {
    assert!((got - want).abs() <= 1e-12, "{what}: {got} vs {want}");
}

#[test]
fn class_counts() {
    let (six, _, _) = setup();
    let counts = six.class_counts();
    let rows = derived("class_counts.tsv");
    assert_eq!(counts.len(), rows.len());
    for r in rows {
        assert_eq!(counts[&r[0]], r[1].parse::<usize>().unwrap(), "{}", r[0]);
    }
}

#[test]
fn tfidf_of_first_recipe() {
    let (six, normalizer, stats) = setup();
    let counts = recipe_terms(&six.recipes()[0], &normalizer, Feed::TitleAndBody);
    let v = tfidf_vector(&counts, &stats);
    let rows = derived("tfidf_recipe1.tsv");
    let nonzero: Vec<(&str, f64)> = v.iter().filter(|(_, w)| *w != 0.0).collect();
    assert_eq!(nonzero.len(), rows.len());
    for ((t, w), r) in nonzero.into_iter().zip(&rows) {
        assert_eq!(t, r[0]);
        assert_close(w, r[1].parse().unwrap(), t);
    }
}

#[test]
fn gini_values_and_threshold() {
    let (_, _, stats) = setup();
    for r in derived("gini.tsv") {
        assert_close(stats.gini(&r[0]).unwrap(), r[1].parse().unwrap(), &r[0]);
    }
    let want: BTreeSet<String> = derived("gini_0.5.txt").into_iter().map(|r| r[0].clone()).collect();
    assert_eq!(gini_vocabulary(&stats, 0.5), want);
}

#[test]
fn mutual_information_ranking() {
    let (_, _, stats) = setup();
    let want: Vec<String> = derived("mi_top5.txt").into_iter().map(|r| r[0].clone()).collect();
    assert_eq!(mutual_information_select(&stats, 5), want);
}

#[test]
fn class_vectors_at_045() {
    let (_, _, stats) = setup();
    let rows = derived("class_vectors_0.45.tsv");
    let mut seen = 0;
    for (ci, class) in stats.classes().iter().enumerate() {
        let v = gini_class_vector(&stats, ci, 0.45);
        let expected: Vec<&Vec<String>> = rows.iter().filter(|r| &r[0] == class).collect();
        assert_eq!(v.len(), expected.len(), "{class}");
        for ((t, w), r) in v.iter().zip(expected) {
            assert_eq!(t, r[1]);
            assert_close(w, r[2].parse().unwrap(), &format!("{class}/{t}"));
            seen += 1;
        }
    }
    assert_eq!(seen, rows.len());
}

#[test]
fn numeric_features_of_second_recipe() {
    let (six, normalizer, _) = setup();
    let r = &six.recipes()[1];
    let f = numeric_features(r, r.gold_ingredients.as_deref().unwrap(), &normalizer);
    let got = f.values();
    for (i, row) in derived("numeric_recipe2.tsv").iter().enumerate() {
        assert_eq!(cuisto::features::NumericFeatures::NAMES[i], row[0]);
        assert_eq!(got[i], row[1].parse::<f64>().unwrap(), "{}", row[0]);
    }
}

#[test]
fn generic_specializations() {
    let (six, normalizer, _) = setup();
    let lexicon = build_lexicon(&six, &normalizer).unwrap();
    let mut got = Vec::new();
    for g in lexicon.generics() {
        if let Some(table) = lexicon.specializations(g) {
            for (x, n) in table {
                got.push(vec![g.clone(), x.clone(), n.to_string()]);
            }
        }
    }
    assert_eq!(got, derived("specializations.tsv"));
}

#[test]
fn agglutination_ngrams() {
    let (six, _, _) = setup();
    let normalizer = Normalizer::new(NormConfig {
        agglutinate: true,
        agglutination_min_count: 3,
        agglutination_max_n: 3,
        ..NormConfig::default()
    })
    .unwrap();
    let model = normalizer.fit_agglutinator(&six).unwrap();
    let got: Vec<String> = model.ngrams().iter().map(|g| g.join(" ")).collect();
    let want: Vec<String> = derived("agglutination.txt").into_iter().map(|r| r[0].clone()).collect();
    assert_eq!(got, want);
}
