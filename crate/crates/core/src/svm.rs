//! One-vs-one linear SVMs over tf-idf vectors.
//!
//! Each pair model is trained with primal stochastic subgradient descent on
//! the regularized hinge loss, step `1 / (lambda * t)`. The bias is an extra
//! constant-1 feature and is regularized with the rest of the weights.
//! A class's score is the sum of its oriented margins against every other
//! class.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::corpus::{Corpus, Recipe};
use crate::error::{Error, Result};
use crate::features::{recipe_terms, tfidf_vector, Feed, LexiconStats, SparseVector, TermCounts};
use crate::fusion::ScoreVector;
use crate::rng;
use crate::textnorm::Normalizer;

pub const SVM_METHOD: &str = "svm";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            lambda: 1e-4,
            epochs: 20,
            seed: 0,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("svm lambda must be positive, got {}", self.lambda)));
        }
        if self.epochs == 0 {
            return Err(Error::Config("svm epochs must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairModel {
    /// Receives the positive side of the margin.
    pub first: String,
    pub second: String,
    pub weights: SparseVector,
    pub bias: f64,
}

impl PairModel {
    pub fn margin(&self, x: &SparseVector) -> f64 {
        self.weights.dot(x) + self.bias
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OvoModel {
    classes: Vec<String>,
    pairs: Vec<PairModel>,
    vocab_filter: Option<BTreeSet<String>>,
}

/// Visiting order for each epoch of one pair: the identity permutation
/// shuffled afresh every epoch from the pair's own stream.
pub fn epoch_orders(seed: u64, pair_index: usize, n: usize, epochs: usize) -> Vec<Vec<usize>> {
    let mut rng = rng::derived(seed, pair_index as u64);
    (0..epochs)
        .map(|_| {
            let mut order: Vec<usize> = (0..n).collect();
            rng::shuffle(&mut order, &mut rng);
            order
        })
        .collect()
}

/// Dense index `dim` is the bias. Returns `(weights, bias)`.
///
/// Weights are kept as `scale * v` so the shrink step costs O(1).
pub fn hinge_sgd(
    xs: &[Vec<(usize, f64)>],
    ys: &[f64],
    dim: usize,
    lambda: f64,
    orders: &[Vec<usize>],
) -> (Vec<f64>, f64) {
    let mut v = vec![0.0; dim];
    let mut vb = 0.0;
    let mut scale = 1.0;
    let mut t = 0u64;
    for order in orders {
        for &i in order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let (x, y) = (&xs[i], ys[i]);
            let raw = x.iter().map(|&(j, w)| v[j] * w).sum::<f64>() + vb;
            let margin = y * scale * raw;
            let shrink = 1.0 - eta * lambda;
            if shrink == 0.0 {
                v.iter_mut().for_each(|w| *w = 0.0);
                vb = 0.0;
                scale = 1.0;
            } else {
                scale *= shrink;
            }
            if margin < 1.0 {
                let coef = eta * y / scale;
                for &(j, w) in x {
                    v[j] += coef * w;
                }
                vb += coef;
            }
            if scale < 1e-9 {
                v.iter_mut().for_each(|w| *w *= scale);
                vb *= scale;
                scale = 1.0;
            }
        }
    }
    v.iter_mut().for_each(|w| *w *= scale);
    (v, vb * scale)
}

/// Train from pre-computed term counts and labels.
pub fn train_ovo_counts(
    docs: &[(TermCounts, &str)],
    stats: &LexiconStats,
    config: &SvmConfig,
    vocab_filter: Option<&BTreeSet<String>>,
) -> Result<OvoModel> {
    config.validate()?;
    let classes = stats.classes().to_vec();
    if classes.len() < 2 {
        return Err(Error::Training(format!(
            "one-vs-one training needs at least 2 classes, got {}",
            classes.len()
        )));
    }
    for c in &classes {
        if !docs.iter().any(|(_, l)| l == c) {
            return Err(Error::Training(format!("class {c:?} has no training document")));
        }
    }
    if let Some((_, l)) = docs.iter().find(|(_, l)| !classes.iter().any(|c| c == l)) {
        return Err(Error::Training(format!("label {l:?} unknown to the lexicon statistics")));
    }

    let vectors: Vec<SparseVector> = docs
        .iter()
        .map(|(counts, _)| {
            let v = tfidf_vector(counts, stats);
            match vocab_filter {
                Some(f) => v.iter().filter(|(t, _)| f.contains(*t)).map(|(t, w)| (t.to_owned(), w)).collect(),
                None => v,
            }
        })
        .collect();
    let vocab: Vec<&str> = vectors
        .iter()
        .flat_map(|v| v.iter().map(|(t, _)| t))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: BTreeMap<&str, usize> = vocab.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    let dense: Vec<Vec<(usize, f64)>> = vectors
        .iter()
        .map(|v| v.iter().map(|(t, w)| (index[t], w)).collect())
        .collect();

    let mut pairs = Vec::new();
    let mut pair_index = 0;
    for (a, first) in classes.iter().enumerate() {
        for second in &classes[a + 1..] {
            let members: Vec<usize> = (0..docs.len())
                .filter(|&i| docs[i].1 == first || docs[i].1 == second)
                .collect();
            let xs: Vec<Vec<(usize, f64)>> = members.iter().map(|&i| dense[i].clone()).collect();
            let ys: Vec<f64> = members
                .iter()
                .map(|&i| if docs[i].1 == first { 1.0 } else { -1.0 })
                .collect();
            let orders = epoch_orders(config.seed, pair_index, members.len(), config.epochs);
            let (w, bias) = hinge_sgd(&xs, &ys, vocab.len(), config.lambda, &orders);
            let weights = vocab.iter().zip(&w).map(|(t, &x)| (t.to_string(), x)).collect();
            pairs.push(PairModel {
                first: first.clone(),
                second: second.clone(),
                weights,
                bias,
            });
            pair_index += 1;
        }
    }
    Ok(OvoModel {
        classes,
        pairs,
        vocab_filter: vocab_filter.cloned(),
    })
}

pub fn train_ovo(
    train: &Corpus,
    stats: &LexiconStats,
    normalizer: &Normalizer,
    config: &SvmConfig,
    vocab_filter: Option<&BTreeSet<String>>,
) -> Result<OvoModel> {
    let docs: Vec<(TermCounts, &str)> = train
        .recipes()
        .iter()
        .map(|r| {
            let label = train
                .label_of(r)
                .ok_or_else(|| Error::Training(format!("recipe {} is unlabeled", r.id)))?;
            Ok((recipe_terms(r, normalizer, Feed::TitleAndBody), label))
        })
        .collect::<Result<_>>()?;
    train_ovo_counts(&docs, stats, config, vocab_filter)
}

impl OvoModel {
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn pairs(&self) -> &[PairModel] {
        &self.pairs
    }

    pub fn vocab_filter(&self) -> Option<&BTreeSet<String>> {
        self.vocab_filter.as_ref()
    }

    pub fn score_vector(&self, recipe_id: &str, x: &SparseVector) -> ScoreVector {
        let mut scores: BTreeMap<String, f64> =
            self.classes.iter().map(|c| (c.clone(), 0.0)).collect();
        for p in &self.pairs {
            let m = p.margin(x);
            *scores.get_mut(&p.first).expect("pair class") += m;
            *scores.get_mut(&p.second).expect("pair class") -= m;
        }
        ScoreVector::new(recipe_id, SVM_METHOD, scores)
    }

    pub fn score_counts(&self, recipe_id: &str, counts: &TermCounts, stats: &LexiconStats) -> ScoreVector {
        self.score_vector(recipe_id, &tfidf_vector(counts, stats))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("svm-model\tv1\n");
        let _ = writeln!(out, "classes\t{}", self.classes.join("\t"));
        if let Some(f) = &self.vocab_filter {
            for t in f {
                let _ = writeln!(out, "filter\t{t}");
            }
        }
        for p in &self.pairs {
            let _ = writeln!(out, "pair\t{}\t{}\t{:.16e}", p.first, p.second, p.bias);
            for (t, w) in p.weights.iter() {
                let _ = writeln!(out, "w\t{t}\t{w:.16e}");
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        const WHAT: &str = "svm model";
        let mut lines = text.lines().enumerate();
        if lines.next().map(|(_, l)| l) != Some("svm-model\tv1") {
            return Err(Error::SchemaMismatch("not a v1 svm model".into()));
        }
        let classes: Vec<String> = match lines.next() {
            Some((_, l)) if l.starts_with("classes\t") => {
                l["classes\t".len()..].split('\t').map(str::to_owned).collect()
            }
            _ => return Err(Error::parse(WHAT, 2, "missing classes line")),
        };
        let float = |s: &str, ln| s.parse::<f64>().map_err(|_| Error::parse(WHAT, ln, "bad number"));
        let mut filter: Option<BTreeSet<String>> = None;
        let mut pairs: Vec<PairModel> = Vec::new();
        for (i, line) in lines {
            let ln = i + 1;
            let cols: Vec<&str> = line.split('\t').collect();
            match cols[..] {
                ["filter", t] => {
                    filter.get_or_insert_with(BTreeSet::new).insert(t.to_owned());
                }
                ["pair", a, b, bias] => pairs.push(PairModel {
                    first: a.to_owned(),
                    second: b.to_owned(),
                    weights: SparseVector::new(),
                    bias: float(bias, ln)?,
                }),
                ["w", t, w] => {
                    let p = pairs
                        .last_mut()
                        .ok_or_else(|| Error::parse(WHAT, ln, "weight before pair header"))?;
                    p.weights.insert(t, float(w, ln)?);
                }
                _ => return Err(Error::parse(WHAT, ln, "unexpected line")),
            }
        }
        let expected = classes.len() * classes.len().saturating_sub(1) / 2;
        if pairs.len() != expected {
            return Err(Error::SchemaMismatch(format!(
                "{} pair models for {} classes",
                pairs.len(),
                classes.len()
            )));
        }
        Ok(OvoModel {
            classes,
            pairs,
            vocab_filter: filter,
        })
    }
}

pub fn score_ovo(
    model: &OvoModel,
    recipe: &Recipe,
    stats: &LexiconStats,
    normalizer: &Normalizer,
) -> ScoreVector {
    model.score_counts(&recipe.id, &recipe_terms(recipe, normalizer, Feed::TitleAndBody), stats)
}
