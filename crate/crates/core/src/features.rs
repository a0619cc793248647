//! Lexicon statistics, tf-idf and Gini-weighted vectors, mutual-information
//! term selection, and the numeric recipe features used by boosting.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use crate::corpus::{Corpus, Recipe};
use crate::error::{Error, Result};
use crate::textnorm::Normalizer;

pub type TermCounts = BTreeMap<String, usize>;

/// Which recipe text feeds a vectorizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Feed {
    TitleOnly,
    TitleAndBody,
}

impl Feed {
    pub fn name(self) -> &'static str {
        match self {
            Feed::TitleOnly => "title",
            Feed::TitleAndBody => "title_body",
        }
    }
}

pub fn term_counts<S: AsRef<str>>(tokens: &[S]) -> TermCounts {
    let mut counts = TermCounts::new();
    for t in tokens {
        *counts.entry(t.as_ref().to_owned()).or_insert(0) += 1;
    }
    counts
}

pub fn recipe_terms(recipe: &Recipe, normalizer: &Normalizer, feed: Feed) -> TermCounts {
    let mut tokens = normalizer.normalize(&recipe.title).into_tokens();
    if feed == Feed::TitleAndBody {
        tokens.extend(normalizer.normalize(&recipe.body).into_tokens());
    }
    term_counts(&tokens)
}

/// Sparse real vector keyed by term; zero weights are never stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector(BTreeMap<String, f64>);

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, term: impl Into<String>, weight: f64) {
        assert!(weight.is_finite(), "non-finite sparse weight");
        let term = term.into();
        if weight == 0.0 {
            self.0.remove(&term);
        } else {
            self.0.insert(term, weight);
        }
    }

    pub fn get(&self, term: &str) -> f64 {
        self.0.get(term).copied().unwrap_or(0.0)
    }

    pub fn contains(&self, term: &str) -> bool {
        self.0.contains_key(term)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        self.iter().map(|(t, w)| w * other.get(t)).sum()
    }

    pub fn norm(&self) -> f64 {
        self.0.values().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, k: f64) -> SparseVector {
        self.iter().map(|(t, w)| (t.to_owned(), w * k)).collect()
    }
}

impl FromIterator<(String, f64)> for SparseVector {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        let mut v = SparseVector::new();
        for (t, w) in iter {
            v.insert(t, w);
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermStats {
    /// Documents of the full collection containing the term.
    pub df: usize,
    /// Training documents containing the term.
    pub df_train: usize,
    /// Training documents of each class containing the term, in class order.
    pub df_class: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexiconStats {
    corpus_size: usize,
    classes: Vec<String>,
    class_sizes: Vec<usize>,
    terms: BTreeMap<String, TermStats>,
}

impl LexiconStats {
    /// `full` is the whole collection used for df/idf; `train` carries one
    /// class label per document and must be drawn from `full`.
    pub fn from_counts<'a>(
        full: impl IntoIterator<Item = &'a TermCounts>,
        train: impl IntoIterator<Item = (&'a TermCounts, &'a str)>,
    ) -> Result<Self> {
        let train: Vec<(&TermCounts, &str)> = train.into_iter().collect();
        if train.is_empty() {
            return Err(Error::Training("empty training corpus".into()));
        }
        let classes: Vec<String> = train
            .iter()
            .map(|(_, c)| c.to_string())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut class_sizes = vec![0; classes.len()];
        let mut terms: BTreeMap<String, TermStats> = BTreeMap::new();
        let mut corpus_size = 0;
        for doc in full {
            corpus_size += 1;
            for term in doc.keys() {
                terms
                    .entry(term.clone())
                    .or_insert_with(|| TermStats {
                        df: 0,
                        df_train: 0,
                        df_class: vec![0; classes.len()],
                    })
                    .df += 1;
            }
        }
        if train.len() > corpus_size {
            return Err(Error::Training("training set larger than full collection".into()));
        }
        for (doc, label) in &train {
            let ci = classes
                .binary_search_by(|c| c.as_str().cmp(label))
                .expect("label collected above");
            class_sizes[ci] += 1;
            for term in doc.keys() {
                let st = terms.get_mut(term).ok_or_else(|| {
                    Error::Training(format!("training term {term:?} missing from full collection"))
                })?;
                st.df_train += 1;
                st.df_class[ci] += 1;
            }
        }
        Ok(LexiconStats {
            corpus_size,
            classes,
            class_sizes,
            terms,
        })
    }

    pub fn corpus_size(&self) -> usize {
        self.corpus_size
    }

    pub fn train_size(&self) -> usize {
        self.class_sizes.iter().sum()
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    pub fn class_index(&self, class: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == class)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, &TermStats)> {
        self.terms.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn term(&self, term: &str) -> Option<&TermStats> {
        self.terms.get(term)
    }

    /// Terms seen in at least one training document.
    pub fn training_vocabulary(&self) -> impl Iterator<Item = &str> {
        self.terms
            .iter()
            .filter(|(_, s)| s.df_train > 0)
            .map(|(k, _)| k.as_str())
    }

    /// `ln(|X| / df)`.
    pub fn idf(&self, term: &str) -> Option<f64> {
        self.terms
            .get(term)
            .map(|s| (self.corpus_size as f64 / s.df as f64).ln())
    }

    /// `sum_c (df_c / df_T)^2`; undefined for terms absent from training.
    pub fn gini(&self, term: &str) -> Option<f64> {
        let s = self.terms.get(term)?;
        if s.df_train == 0 {
            return None;
        }
        let total = s.df_train as f64;
        Some(s.df_class.iter().map(|&d| (d as f64 / total).powi(2)).sum())
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "#corpus_size\t{}", self.corpus_size);
        for (c, n) in self.classes.iter().zip(&self.class_sizes) {
            let _ = writeln!(out, "#class_size\t{c}\t{n}");
        }
        out.push_str("term\tdf\tdf_train");
        for c in &self.classes {
            let _ = write!(out, "\t{c}");
        }
        out.push('\n');
        for (term, st) in &self.terms {
            let _ = write!(out, "{term}\t{}\t{}", st.df, st.df_train);
            for d in &st.df_class {
                let _ = write!(out, "\t{d}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        const WHAT: &str = "lexicon stats";
        let mut corpus_size = None;
        let mut classes = Vec::new();
        let mut class_sizes = Vec::new();
        let mut terms = BTreeMap::new();
        let mut header_seen = false;
        let num = |s: &str, line: usize| {
            s.parse::<usize>()
                .map_err(|_| Error::parse(WHAT, line, format!("bad count {s:?}")))
        };
        for (i, line) in text.lines().enumerate() {
            let ln = i + 1;
            let cols: Vec<&str> = line.split('\t').collect();
            match cols[0] {
                "#corpus_size" if cols.len() == 2 => corpus_size = Some(num(cols[1], ln)?),
                "#class_size" if cols.len() == 3 && !header_seen => {
                    classes.push(cols[1].to_owned());
                    class_sizes.push(num(cols[2], ln)?);
                }
                "term" if !header_seen => {
                    if cols.len() != 3 + classes.len() || cols[3..] != classes[..] {
                        return Err(Error::parse(WHAT, ln, "header does not match class list"));
                    }
                    header_seen = true;
                }
                _ if header_seen && cols.len() == 3 + classes.len() => {
                    let df_class = cols[3..]
                        .iter()
                        .map(|s| num(s, ln))
                        .collect::<Result<Vec<_>>>()?;
                    terms.insert(
                        cols[0].to_owned(),
                        TermStats {
                            df: num(cols[1], ln)?,
                            df_train: num(cols[2], ln)?,
                            df_class,
                        },
                    );
                }
                _ => return Err(Error::parse(WHAT, ln, "unexpected line")),
            }
        }
        let corpus_size = corpus_size.ok_or_else(|| Error::parse(WHAT, 0, "missing #corpus_size"))?;
        if !header_seen {
            return Err(Error::parse(WHAT, 0, "missing header"));
        }
        Ok(LexiconStats {
            corpus_size,
            classes,
            class_sizes,
            terms,
        })
    }
}

/// Statistics over `full` (df, idf) and `train` (per-class df, Gini).
pub fn build_stats(
    train: &Corpus,
    full: &Corpus,
    normalizer: &Normalizer,
    feed: Feed,
) -> Result<LexiconStats> {
    let labels: Vec<&str> = train
        .recipes()
        .iter()
        .map(|r| {
            train
                .label_of(r)
                .ok_or_else(|| Error::Training(format!("recipe {} is unlabeled", r.id)))
        })
        .collect::<Result<_>>()?;
    build_stats_with_labels(train, &labels, full, normalizer, feed)
}

/// Like [`build_stats`] with explicit (possibly regrouped) training labels.
pub fn build_stats_with_labels(
    train: &Corpus,
    labels: &[&str],
    full: &Corpus,
    normalizer: &Normalizer,
    feed: Feed,
) -> Result<LexiconStats> {
    assert_eq!(train.len(), labels.len());
    let full_ids: HashSet<&str> = full.recipes().iter().map(|r| r.id.as_str()).collect();
    if let Some(r) = train
        .recipes()
        .iter()
        .find(|r| !full_ids.contains(r.id.as_str()))
    {
        return Err(Error::Training(format!(
            "training recipe {} is not part of the full collection",
            r.id
        )));
    }
    let full_counts: Vec<TermCounts> = full
        .recipes()
        .iter()
        .map(|r| recipe_terms(r, normalizer, feed))
        .collect();
    let by_id: BTreeMap<&str, &TermCounts> = full
        .recipes()
        .iter()
        .zip(&full_counts)
        .map(|(r, c)| (r.id.as_str(), c))
        .collect();
    let train_docs = train
        .recipes()
        .iter()
        .zip(labels)
        .map(|(r, &l)| (by_id[r.id.as_str()], l));
    LexiconStats::from_counts(&full_counts, train_docs)
}

/// `tf * idf` for every in-lexicon term of the document.
pub fn tfidf_vector(counts: &TermCounts, stats: &LexiconStats) -> SparseVector {
    let mut v = SparseVector::new();
    for (term, &tf) in counts {
        if let Some(idf) = stats.idf(term) {
            v.insert(term.clone(), tf as f64 * idf);
        }
    }
    v
}

/// Terms whose Gini index reaches `threshold`.
pub fn gini_vocabulary(stats: &LexiconStats, threshold: f64) -> BTreeSet<String> {
    stats
        .training_vocabulary()
        .filter(|t| stats.gini(t).is_some_and(|g| g >= threshold))
        .map(str::to_owned)
        .collect()
}

/// Recipe side: `tf * idf * G` over terms with `G >= threshold`.
pub fn gini_recipe_vector(counts: &TermCounts, stats: &LexiconStats, threshold: f64) -> SparseVector {
    let mut v = SparseVector::new();
    for (term, &tf) in counts {
        if let (Some(g), Some(idf)) = (stats.gini(term), stats.idf(term)) {
            if g >= threshold {
                v.insert(term.clone(), tf as f64 * idf * g);
            }
        }
    }
    v
}

/// Class side: `df_c * idf * G` over terms with `G >= threshold`.
pub fn gini_class_vector(stats: &LexiconStats, class: usize, threshold: f64) -> SparseVector {
    let mut v = SparseVector::new();
    for (term, st) in stats.terms() {
        let df_c = st.df_class[class];
        if df_c == 0 {
            continue;
        }
        if let (Some(g), Some(idf)) = (stats.gini(term), stats.idf(term)) {
            if g >= threshold {
                v.insert(term, df_c as f64 * idf * g);
            }
        }
    }
    v
}

pub fn gini_weighted_vectors(
    counts: &TermCounts,
    class: usize,
    stats: &LexiconStats,
    threshold: f64,
) -> (SparseVector, SparseVector) {
    (
        gini_recipe_vector(counts, stats, threshold),
        gini_class_vector(stats, class, threshold),
    )
}

/// Expected mutual information (bits) between term presence and membership
/// of one class, from the 2x2 document contingency table.
pub fn mutual_information(stats: &LexiconStats, term: &str, class: usize) -> f64 {
    let Some(st) = stats.term(term) else {
        return 0.0;
    };
    let n = stats.train_size() as f64;
    let n11 = st.df_class[class] as f64;
    let n10 = (st.df_train - st.df_class[class]) as f64;
    let n01 = (stats.class_sizes[class] - st.df_class[class]) as f64;
    let n00 = n - n11 - n10 - n01;
    let cell = |nij: f64, row: f64, col: f64| {
        if nij <= 0.0 {
            0.0
        } else {
            nij / n * (n * nij / (row * col)).log2()
        }
    };
    let (n1x, n0x) = (n11 + n10, n01 + n00);
    let (nx1, nx0) = (n11 + n01, n10 + n00);
    cell(n11, n1x, nx1) + cell(n01, n0x, nx1) + cell(n10, n1x, nx0) + cell(n00, n0x, nx0)
}

/// Highest mutual information over all classes.
pub fn max_mutual_information(stats: &LexiconStats, term: &str) -> f64 {
    (0..stats.classes().len())
        .map(|c| mutual_information(stats, term, c))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Up to `k` training terms ranked by decreasing max-class mutual
/// information, ties broken by term order. Shorter selections are prefixes
/// of longer ones.
pub fn mutual_information_select(stats: &LexiconStats, k: usize) -> Vec<String> {
    let mut scored: Vec<(f64, &str)> = stats
        .training_vocabulary()
        .map(|t| (max_mutual_information(stats, t), t))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    scored.into_iter().take(k).map(|(_, t)| t.to_owned()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NumericFeatures {
    pub title_word_count: usize,
    pub body_word_count: usize,
    pub sentence_count: usize,
    pub separator_count: usize,
    pub ingredient_list_size: usize,
}

impl NumericFeatures {
    pub const NAMES: [&'static str; 5] = [
        "title_word_count",
        "body_word_count",
        "sentence_count",
        "separator_count",
        "ingredient_list_size",
    ];

    pub fn values(&self) -> [f64; 5] {
        [
            self.title_word_count as f64,
            self.body_word_count as f64,
            self.sentence_count as f64,
            self.separator_count as f64,
            self.ingredient_list_size as f64,
        ]
    }
}

const SENTENCE_END: [char; 3] = ['.', '!', '?'];
const SEPARATORS: [char; 6] = ['.', ',', ':', ';', '!', '?'];

/// Non-blank segments delimited by runs of `.`, `!` or `?`.
pub fn sentence_count(text: &str) -> usize {
    text.split(&SENTENCE_END[..])
        .filter(|seg| !seg.trim().is_empty())
        .count()
}

pub fn separator_count(text: &str) -> usize {
    text.chars().filter(|c| SEPARATORS.contains(c)).count()
}

pub fn numeric_features<S: AsRef<str>>(
    recipe: &Recipe,
    ingredients: &[S],
    normalizer: &Normalizer,
) -> NumericFeatures {
    NumericFeatures {
        title_word_count: normalizer.normalize(&recipe.title).len(),
        body_word_count: normalizer.normalize(&recipe.body).len(),
        sentence_count: sentence_count(&recipe.body),
        separator_count: separator_count(&recipe.body),
        ingredient_list_size: ingredients.len(),
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn doc(terms: &[&str]) -> TermCounts {
        term_counts(terms)
    }

    #[test]
    fn idf_zero_for_ubiquitous_term() {
        let docs: Vec<TermCounts> = (0..10).map(|i| doc(&["sel", &format!("x{i}")])).collect();
        let stats = LexiconStats::from_counts(&docs, docs.iter().map(|d| (d, "dessert"))).unwrap();
        assert_eq!(stats.idf("sel"), Some(0.0));
        assert!(tfidf_vector(&doc(&["sel"]), &stats).is_empty());
    }

    #[test]
    fn gini_pure_and_uniform() {
        let docs = [
            doc(&["sucre", "four"]),
            doc(&["sucre", "four"]),
            doc(&["sucre", "four"]),
            doc(&["sel"]),
            doc(&["sel"]),
        ];
        let labels = ["dessert", "dessert", "dessert", "entree", "plat_principal"];
        let stats = LexiconStats::from_counts(&docs, docs.iter().zip(labels)).unwrap();
        assert_eq!(stats.gini("sucre"), Some(1.0));
        assert_eq!(stats.gini("sel"), Some(0.5));

        let docs = [doc(&["eau"]), doc(&["eau"]), doc(&["eau"])];
        let labels = ["dessert", "entree", "plat_principal"];
        let stats = LexiconStats::from_counts(&docs, docs.iter().zip(labels)).unwrap();
        assert!((stats.gini("eau").unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn tfidf_weight_is_tf_times_idf() {
        let mut docs: Vec<TermCounts> = (0..7).map(|_| doc(&["autre"])).collect();
        docs.push(doc(&["beurre", "beurre"]));
        let stats = LexiconStats::from_counts(&docs, docs.iter().map(|d| (d, "dessert"))).unwrap();
        let v = tfidf_vector(&doc(&["beurre", "beurre", "inconnu"]), &stats);
        assert_eq!(v.len(), 1);
        assert!((v.get("beurre") - 2.0 * 8f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn full_only_terms_have_no_gini() {
        let full = [doc(&["a"]), doc(&["b"])];
        let stats = LexiconStats::from_counts(&full, [(&full[0], "dessert")]).unwrap();
        assert_eq!(stats.gini("b"), None);
        assert!(stats.idf("b").is_some());
        assert_eq!(stats.training_vocabulary().collect::<Vec<_>>(), vec!["a"]);
    }

    #[test]
    fn empty_train_is_an_error() {
        let full = [doc(&["a"])];
        assert!(LexiconStats::from_counts(&full, std::iter::empty()).is_err());
    }

    #[test]
    fn gini_threshold_zero_keeps_all_training_terms() {
        let docs = [doc(&["a", "b"]), doc(&["b", "c"])];
        let stats = LexiconStats::from_counts(&docs, docs.iter().zip(["entree", "dessert"])).unwrap();
        assert_eq!(gini_vocabulary(&stats, 0.0).len(), 3);
        assert_eq!(gini_vocabulary(&stats, 0.45).len(), 3);
        assert_eq!(gini_vocabulary(&stats, 0.6).len(), 2);
    }

    #[test]
    fn mi_selection_truncates() {
        let docs = [doc(&["a", "b"]), doc(&["b", "c"]), doc(&["d"])];
        let stats = LexiconStats::from_counts(&docs, docs.iter().zip(["x", "y", "y"])).unwrap();
        assert_eq!(mutual_information_select(&stats, 100).len(), 4);
        assert_eq!(mutual_information_select(&stats, 2).len(), 2);
    }

    #[test]
    fn sentence_and_separator_counts() {
        assert_eq!(sentence_count("A. B. C."), 3);
        assert_eq!(separator_count("A. B. C."), 3);
        assert_eq!(sentence_count("Mélanger, puis cuire"), 1);
        assert_eq!(sentence_count("Ah!! Oui?"), 2);
        assert_eq!(sentence_count("..."), 0);
        assert_eq!(separator_count("a, b: c; d! e? f."), 6);
    }

    #[test]
    fn empty_ingredient_list() {
        let r = Recipe::new("1", "Tarte", "Cuire.");
        let f = numeric_features::<&str>(&r, &[], &Normalizer::default());
        assert_eq!(f.ingredient_list_size, 0);
        assert_eq!(f.title_word_count, 1);
    }

    #[test]
    fn stats_tsv_roundtrip() {
        let docs = [doc(&["a", "b"]), doc(&["b", "c"]), doc(&["z"])];
        let stats =
            LexiconStats::from_counts(&docs, docs[..2].iter().zip(["entree", "dessert"])).unwrap();
        let text = stats.to_tsv();
        assert!(text.contains("term\tdf\tdf_train\tdessert\tentree\n"));
        assert_eq!(LexiconStats::from_tsv(&text).unwrap(), stats);
    }

    fn random_stats() -> impl Strategy<Value = LexiconStats> {
        let doc = proptest::collection::btree_set(0usize..15, 1..6);
        proptest::collection::vec((doc, 0usize..3), 3..25).prop_map(|docs| {
            let counts: Vec<TermCounts> = docs
                .iter()
                .map(|(d, _)| d.iter().map(|t| (format!("t{t:02}"), 1 + t % 3)).collect())
                .collect();
            let labels = ["dessert", "entree", "plat_principal"];
            LexiconStats::from_counts(
                &counts,
                counts.iter().zip(docs.iter().map(|(_, c)| labels[*c])),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn class_df_sums_to_train_df(stats in random_stats()) {
            let k = stats.classes().len() as f64;
            for (term, st) in stats.terms() {
                prop_assert_eq!(st.df_class.iter().sum::<usize>(), st.df_train);
                let g = stats.gini(term).unwrap();
                prop_assert!(g >= 1.0 / k - 1e-12 && g <= 1.0 + 1e-12);
                let single = st.df_class.iter().filter(|&&d| d > 0).count() == 1;
                prop_assert_eq!(single, (g - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn mi_selection_is_prefix_stable(stats in random_stats(), k1 in 1usize..10, extra in 0usize..10) {
            let short = mutual_information_select(&stats, k1);
            let long = mutual_information_select(&stats, k1 + extra);
            prop_assert_eq!(&long[..short.len()], &short[..]);
        }

        #[test]
        fn tfidf_weight_decreases_with_df(tf in 1usize..10, n in 3usize..50, df in 1usize..48) {
            prop_assume!(df + 1 < n);
            let mut full: Vec<TermCounts> = (0..n).map(|_| doc(&["pad"])).collect();
            for d in full.iter_mut().take(df) {
                d.insert("t".into(), 1);
            }
            let lo = LexiconStats::from_counts(&full, [(&full[0], "x")]).unwrap();
            full[df].insert("t".into(), 1);
            let hi = LexiconStats::from_counts(&full, [(&full[0], "x")]).unwrap();
            let counts: TermCounts = [("t".to_owned(), tf)].into();
            let (w_lo, w_hi) = (tfidf_vector(&counts, &lo).get("t"), tfidf_vector(&counts, &hi).get("t"));
            prop_assert!(w_hi >= 0.0);
            prop_assert!(w_hi < w_lo);
        }

        #[test]
        fn raising_threshold_shrinks_vocabulary(stats in random_stats(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(gini_vocabulary(&stats, hi).is_subset(&gini_vocabulary(&stats, lo)));
        }
    }
}
