//! Classification and extraction scoring.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::corpus::{Corpus, Difficulty};
use crate::error::{Error, Result};
use crate::textnorm::Normalizer;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub gold: usize,
    pub predicted: usize,
    pub correct: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub recipes: usize,
    pub micro_f: f64,
    /// Unweighted mean of per-class F1.
    pub macro_f: f64,
    /// F1 of the mean precision and mean recall.
    pub macro_f_of_means: f64,
    /// Classes occurring in the gold labels or the predictions.
    pub per_class: BTreeMap<String, ClassScores>,
    pub mean_distance: Option<f64>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f_measure(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// `gold` is `(recipe id, class)`; `known` lists every admissible class.
pub fn classification_report_labels(
    gold: &[(&str, &str)],
    predicted: &BTreeMap<String, String>,
    known: &[&str],
    ordinal: bool,
) -> Result<ClassificationReport> {
    if gold.is_empty() {
        return Err(Error::Evaluation("no gold recipe to evaluate".into()));
    }
    let mut per_class: BTreeMap<String, ClassScores> = BTreeMap::new();
    let mut distance = 0usize;
    let (mut correct, mut n_pred) = (0usize, 0usize);
    for &(id, g) in gold {
        let p = predicted
            .get(id)
            .ok_or_else(|| Error::Evaluation(format!("no prediction for recipe {id}")))?;
        for label in [g, p.as_str()] {
            if !known.contains(&label) {
                return Err(Error::Evaluation(format!("unknown class label {label:?} (recipe {id})")));
            }
        }
        per_class.entry(g.to_owned()).or_default().gold += 1;
        let ps = per_class.entry(p.clone()).or_default();
        ps.predicted += 1;
        n_pred += 1;
        if p == g {
            ps.correct += 1;
            correct += 1;
        }
        if ordinal {
            let rank = |s: &str| {
                Difficulty::from_id(s)
                    .map(Difficulty::rank)
                    .ok_or_else(|| Error::Evaluation(format!("{s:?} is not a difficulty level")))
            };
            distance += rank(g)?.abs_diff(rank(p)?) as usize;
        }
    }
    for s in per_class.values_mut() {
        s.precision = ratio(s.correct, s.predicted);
        s.recall = ratio(s.correct, s.gold);
        s.f1 = f_measure(s.precision, s.recall);
    }
    let k = per_class.len() as f64;
    let macro_f = per_class.values().map(|s| s.f1).sum::<f64>() / k;
    let mean_p = per_class.values().map(|s| s.precision).sum::<f64>() / k;
    let mean_r = per_class.values().map(|s| s.recall).sum::<f64>() / k;
    let micro_f = f_measure(ratio(correct, n_pred), ratio(correct, gold.len()));
    Ok(ClassificationReport {
        recipes: gold.len(),
        micro_f,
        macro_f,
        macro_f_of_means: f_measure(mean_p, mean_r),
        per_class,
        mean_distance: ordinal.then(|| distance as f64 / gold.len() as f64),
    })
}

pub fn classification_report(
    gold: &Corpus,
    predicted: &BTreeMap<String, String>,
    ordinal: bool,
) -> Result<ClassificationReport> {
    let labels: Vec<(&str, &str)> = gold
        .recipes()
        .iter()
        .map(|r| {
            gold.label_of(r)
                .map(|l| (r.id.as_str(), l))
                .ok_or_else(|| Error::Evaluation(format!("gold recipe {} is unlabeled", r.id)))
        })
        .collect::<Result<_>>()?;
    classification_report_labels(&labels, predicted, &gold.label_kind().class_ids(), ordinal)
}

impl ClassificationReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "recipes            {}", self.recipes);
        let _ = writeln!(out, "micro F            {:.6}", self.micro_f);
        let _ = writeln!(out, "macro F            {:.6}", self.macro_f);
        let _ = writeln!(out, "macro F (mean P/R) {:.6}", self.macro_f_of_means);
        if let Some(d) = self.mean_distance {
            let _ = writeln!(out, "mean distance      {d:.6}");
        }
        let _ = writeln!(out, "\n{:<24}{:>10}{:>10}{:>10}{:>8}{:>8}", "class", "P", "R", "F1", "gold", "pred");
        for (c, s) in &self.per_class {
            let _ = writeln!(
                out,
                "{c:<24}{:>10.6}{:>10.6}{:>10.6}{:>8}{:>8}",
                s.precision, s.recall, s.f1, s.gold, s.predicted
            );
        }
        out
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("metric\tclass\tvalue\n");
        let _ = writeln!(out, "micro_f\t\t{:.6}", self.micro_f);
        let _ = writeln!(out, "macro_f\t\t{:.6}", self.macro_f);
        let _ = writeln!(out, "macro_f_of_means\t\t{:.6}", self.macro_f_of_means);
        if let Some(d) = self.mean_distance {
            let _ = writeln!(out, "mean_distance\t\t{d:.6}");
        }
        for (c, s) in &self.per_class {
            let _ = writeln!(out, "precision\t{c}\t{:.6}", s.precision);
            let _ = writeln!(out, "recall\t{c}\t{:.6}", s.recall);
            let _ = writeln!(out, "f1\t{c}\t{:.6}", s.f1);
        }
        out
    }
}

/// How run and gold ingredient strings are reduced before comparison.
#[derive(Debug, Clone)]
pub struct ItemMatcher {
    normalizer: Normalizer,
    pub fold_plurals: bool,
    pub deaccent: bool,
}

impl Default for ItemMatcher {
    fn default() -> Self {
        ItemMatcher::new(Normalizer::default())
    }
}

const ACCENTS: [(char, char); 16] = [
    ('à', 'a'), ('â', 'a'), ('ä', 'a'), ('ç', 'c'), ('é', 'e'), ('è', 'e'), ('ê', 'e'), ('ë', 'e'),
    ('î', 'i'), ('ï', 'i'), ('ô', 'o'), ('ö', 'o'), ('ù', 'u'), ('û', 'u'), ('ü', 'u'), ('ÿ', 'y'),
];

impl ItemMatcher {
    pub fn new(normalizer: Normalizer) -> Self {
        ItemMatcher {
            normalizer,
            fold_plurals: true,
            deaccent: false,
        }
    }

    pub fn key(&self, item: &str) -> String {
        let mut s = self.normalizer.base_tokens(item).join(" ");
        if self.deaccent {
            s = s
                .chars()
                .map(|c| ACCENTS.iter().find(|(a, _)| *a == c).map_or(c, |(_, b)| *b))
                .collect();
        }
        if self.fold_plurals && s.len() > 1 && (s.ends_with('s') || s.ends_with('x')) {
            s.pop();
        }
        s
    }
}

/// Relevant ingredients per recipe.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Qrels(pub BTreeMap<String, BTreeSet<String>>);

impl Qrels {
    pub fn from_corpus(corpus: &Corpus) -> Self {
        Qrels(
            corpus
                .recipes()
                .iter()
                .filter_map(|r| {
                    let g = r.gold_ingredients.as_ref()?;
                    Some((r.id.clone(), g.iter().cloned().collect()))
                })
                .collect(),
        )
    }

    /// `recipe_id<TAB>0<TAB>ingredient<TAB>1`; lines with relevance 0 are
    /// read but contribute nothing.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let [id, _, item, rel] = cols[..] else {
                return Err(Error::parse("qrel file", i + 1, "expected 4 tab-separated columns"));
            };
            let entry = map.entry(id.to_owned()).or_default();
            match rel.trim() {
                "0" => {}
                "1" => {
                    entry.insert(item.to_owned());
                }
                other => return Err(Error::parse("qrel file", i + 1, format!("bad relevance {other:?}"))),
            }
        }
        Ok(Qrels(map))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (id, items) in &self.0 {
            for item in items {
                let _ = writeln!(out, "{id}\t0\t{item}\t1");
            }
        }
        out
    }
}

/// Ranked ingredients per recipe from `recipe_id<TAB>rank<TAB>ingredient[<TAB>confidence]`.
pub fn parse_run(text: &str) -> Result<BTreeMap<String, Vec<String>>> {
    let mut ranked: BTreeMap<String, Vec<(usize, String)>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 3 {
            return Err(Error::parse("run file", i + 1, "expected id, rank and ingredient"));
        }
        let rank = cols[1]
            .parse()
            .map_err(|_| Error::parse("run file", i + 1, format!("bad rank {:?}", cols[1])))?;
        ranked.entry(cols[0].to_owned()).or_default().push((rank, cols[2].to_owned()));
    }
    Ok(ranked
        .into_iter()
        .map(|(id, mut v)| {
            v.sort_by_key(|(r, _)| *r);
            (id, v.into_iter().map(|(_, s)| s).collect())
        })
        .collect())
}

/// TREC average precision: precision at each relevant rank, over `|gold|`.
pub fn average_precision(ranked: &[String], gold: &BTreeSet<String>) -> Result<f64> {
    let mut seen = BTreeSet::new();
    let (mut hits, mut sum) = (0usize, 0.0);
    for (k, item) in ranked.iter().enumerate() {
        if !seen.insert(item) {
            return Err(Error::Evaluation(format!("ingredient {item:?} ranked twice")));
        }
        if gold.contains(item) {
            hits += 1;
            sum += hits as f64 / (k + 1) as f64;
        }
    }
    Ok(if gold.is_empty() { 0.0 } else { sum / gold.len() as f64 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapReport {
    pub map: f64,
    pub per_recipe: BTreeMap<String, f64>,
    pub skipped_empty_gold: usize,
}

impl MapReport {
    pub fn to_text(&self) -> String {
        format!(
            "recipes            {}\nMAP                {:.6}\nskipped (no gold)  {}\n",
            self.per_recipe.len(),
            self.map,
            self.skipped_empty_gold
        )
    }

    pub fn to_tsv(&self) -> String {
        let mut out = format!("recipe\tap\nALL\t{:.6}\n", self.map);
        for (id, ap) in &self.per_recipe {
            let _ = writeln!(out, "{id}\t{ap:.6}");
        }
        out
    }
}

pub fn mean_average_precision(
    run: &BTreeMap<String, Vec<String>>,
    qrels: &Qrels,
    matcher: &ItemMatcher,
) -> Result<MapReport> {
    if let Some(id) = run.keys().find(|id| !qrels.0.contains_key(*id)) {
        return Err(Error::Evaluation(format!("run recipe {id} has no qrel entry")));
    }
    let mut per_recipe = BTreeMap::new();
    let mut skipped = 0;
    for (id, gold) in &qrels.0 {
        let gold: BTreeSet<String> = gold.iter().map(|g| matcher.key(g)).collect();
        if gold.is_empty() {
            skipped += 1;
            continue;
        }
        let ranked: Vec<String> = run
            .get(id)
            .map(|v| v.iter().map(|s| matcher.key(s)).collect())
            .unwrap_or_default();
        per_recipe.insert(id.clone(), average_precision(&ranked, &gold)?);
    }
    if per_recipe.is_empty() {
        return Err(Error::Evaluation("no qrel recipe with a non-empty gold list".into()));
    }
    let map = per_recipe.values().sum::<f64>() / per_recipe.len() as f64;
    Ok(MapReport {
        map,
        per_recipe,
        skipped_empty_gold: skipped,
    })
}
