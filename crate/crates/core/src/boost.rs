//! Real-valued AdaBoost.MH over presence stumps.
//!
//! A weak hypothesis tests one feature (a text n-gram's presence, or a
//! numeric field exceeding a threshold) and votes a real value per class on
//! each side of the test. Votes are `0.5 * ln((W+ + eps) / (W- + eps))` where
//! `W+`/`W-` are the weights of the (example, class) pairs on that side that
//! do and do not carry the class. Each round picks the test with the smallest
//! normalizer `Z`; ties within a relative 1e-10 go to the smallest feature key.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::corpus::Recipe;
use crate::error::{Error, Result};
use crate::features::{numeric_features, NumericFeatures};
use crate::fusion::ScoreVector;
use crate::textnorm::{ngrams, Normalizer};

pub const BOOST_METHOD: &str = "boost";
/// Relative slack under which two normalizers count as tied.
pub const TIE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureSchema {
    pub title_max_n: usize,
    pub body_max_n: usize,
    pub ingredient_max_n: usize,
}

impl Default for FeatureSchema {
    fn default() -> Self {
        FeatureSchema {
            title_max_n: 3,
            body_max_n: 4,
            ingredient_max_n: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TextField {
    Title,
    Body,
    Ingredients,
}

impl TextField {
    pub const ALL: [TextField; 3] = [TextField::Title, TextField::Body, TextField::Ingredients];

    pub fn prefix(self) -> &'static str {
        match self {
            TextField::Title => "title",
            TextField::Body => "body",
            TextField::Ingredients => "ingr",
        }
    }

    fn from_prefix(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.prefix() == s)
    }
}

/// The feature view of one recipe.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostFeatures {
    pub schema: FeatureSchema,
    pub title: BTreeSet<String>,
    pub body: BTreeSet<String>,
    pub ingredients: BTreeSet<String>,
    pub numeric: [f64; 5],
}

impl BoostFeatures {
    pub fn text(&self, field: TextField) -> &BTreeSet<String> {
        match field {
            TextField::Title => &self.title,
            TextField::Body => &self.body,
            TextField::Ingredients => &self.ingredients,
        }
    }
}

/// Ingredient n-grams are taken within each ingredient, never across two.
pub fn boost_features<S: AsRef<str>>(
    recipe: &Recipe,
    ingredients: &[S],
    normalizer: &Normalizer,
    schema: FeatureSchema,
) -> BoostFeatures {
    let grams = |text: &str, n| -> BTreeSet<String> {
        ngrams(normalizer.normalize(text).tokens(), n).into_iter().collect()
    };
    let ingredient_grams = ingredients
        .iter()
        .flat_map(|i| grams(i.as_ref(), schema.ingredient_max_n))
        .collect();
    BoostFeatures {
        schema,
        title: grams(&recipe.title, schema.title_max_n),
        body: grams(&recipe.body, schema.body_max_n),
        ingredients: ingredient_grams,
        numeric: numeric_features(recipe, ingredients, normalizer).values(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureTest {
    Text { field: TextField, ngram: String },
    /// Holds when the field's value is strictly above the threshold.
    Numeric { field: usize, threshold: f64 },
}

impl FeatureTest {
    pub fn key(&self) -> String {
        match self {
            FeatureTest::Text { field, ngram } => format!("{}:{ngram}", field.prefix()),
            FeatureTest::Numeric { field, threshold } => {
                format!("num:{}:{threshold}", NumericFeatures::NAMES[*field])
            }
        }
    }

    pub fn holds(&self, f: &BoostFeatures) -> bool {
        match self {
            FeatureTest::Text { field, ngram } => f.text(*field).contains(ngram),
            FeatureTest::Numeric { field, threshold } => f.numeric[*field] > *threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakHypothesis {
    pub test: FeatureTest,
    /// Aligned with the model's class list.
    pub votes_present: Vec<f64>,
    pub votes_absent: Vec<f64>,
}

impl WeakHypothesis {
    pub fn votes(&self, f: &BoostFeatures) -> &[f64] {
        if self.test.holds(f) {
            &self.votes_present
        } else {
            &self.votes_absent
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostConfig {
    pub max_rounds: usize,
    /// `None` means `1 / (examples * classes)`.
    pub smoothing_epsilon: Option<f64>,
    pub dev_patience: usize,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            max_rounds: 500,
            smoothing_epsilon: None,
            dev_patience: 50,
        }
    }
}

impl BoostConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_rounds == 0 {
            return Err(Error::Config("boost max_rounds must be at least 1".into()));
        }
        if self.dev_patience == 0 {
            return Err(Error::Config("boost dev_patience must be at least 1".into()));
        }
        if let Some(e) = self.smoothing_epsilon {
            if !(e > 0.0 && e.is_finite()) {
                return Err(Error::Config(format!("boost smoothing epsilon must be positive, got {e}")));
            }
        }
        Ok(())
    }
}

/// Per-round diagnostics, one entry per trained round.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoostTrace {
    pub z: Vec<f64>,
    pub weighted_error: Vec<f64>,
    pub train_error: Vec<f64>,
    /// Empty when no dev set was given.
    pub dev_micro_f: Vec<f64>,
    pub chosen_rounds: usize,
    /// Set when a round found no hypothesis with weighted error below 0.5.
    pub halted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoostModel {
    classes: Vec<String>,
    schema: FeatureSchema,
    rounds: Vec<WeakHypothesis>,
}

struct Candidate {
    key: String,
    test: FeatureTest,
    /// Training examples for which the test holds.
    present: Vec<usize>,
}

fn z_value(pp: &[f64], pn: &[f64], ap: &[f64], an: &[f64], eps: f64) -> f64 {
    let side = |wp: f64, wn: f64| {
        let r = ((wn + eps) / (wp + eps)).sqrt();
        wp * r + wn / r
    };
    (0..pp.len()).map(|c| side(pp[c], pn[c]) + side(ap[c], an[c])).sum()
}

fn vote(wp: f64, wn: f64, eps: f64) -> f64 {
    0.5 * ((wp + eps) / (wn + eps)).ln()
}

/// First index of the largest value.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn candidates(train: &[(BoostFeatures, &str)]) -> Vec<Candidate> {
    let mut out = Vec::new();
    for field in TextField::ALL {
        let mut postings: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, (f, _)) in train.iter().enumerate() {
            for g in f.text(field) {
                postings.entry(g).or_default().push(i);
            }
        }
        for (g, present) in postings {
            if present.len() >= 2 {
                let test = FeatureTest::Text {
                    field,
                    ngram: g.to_owned(),
                };
                out.push(Candidate {
                    key: test.key(),
                    test,
                    present,
                });
            }
        }
    }
    for field in 0..NumericFeatures::NAMES.len() {
        let values: BTreeSet<u64> = train.iter().map(|(f, _)| f.numeric[field].to_bits()).collect();
        let mut sorted: Vec<f64> = values.into_iter().map(f64::from_bits).collect();
        sorted.sort_by(f64::total_cmp);
        for w in sorted.windows(2) {
            let threshold = (w[0] + w[1]) / 2.0;
            let present = (0..train.len())
                .filter(|&i| train[i].0.numeric[field] > threshold)
                .collect();
            let test = FeatureTest::Numeric { field, threshold };
            out.push(Candidate {
                key: test.key(),
                test,
                present,
            });
        }
    }
    out
}

pub fn train_boost(
    train: &[(BoostFeatures, &str)],
    dev: &[(BoostFeatures, &str)],
    config: &BoostConfig,
) -> Result<(BoostModel, BoostTrace)> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::Training("boosting needs a non-empty training set".into()));
    }
    let schema = train[0].0.schema;
    if train.iter().chain(dev).any(|(f, _)| f.schema != schema) {
        return Err(Error::SchemaMismatch("examples use different feature schemas".into()));
    }
    let classes: Vec<String> = train
        .iter()
        .map(|(_, l)| l.to_string())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if classes.len() < 2 {
        return Err(Error::Training("boosting needs at least 2 training classes".into()));
    }
    let (m, k) = (train.len(), classes.len());
    let eps = config.smoothing_epsilon.unwrap_or(1.0 / (m * k) as f64);
    let label: Vec<usize> = train
        .iter()
        .map(|(_, l)| classes.iter().position(|c| c == l).expect("class"))
        .collect();
    let positive = |i: usize, c: usize| label[i] == c;

    let cands = candidates(train);
    if cands.is_empty() {
        return Err(Error::Training("no candidate feature (every feature is constant or rare)".into()));
    }
    let mut in_present = vec![false; m];
    let mut d = vec![vec![1.0 / (m * k) as f64; k]; m];
    let mut train_margin = vec![vec![0.0; k]; m];
    let mut dev_margin = vec![vec![0.0; k]; dev.len()];
    let mut rounds = Vec::new();
    let mut trace = BoostTrace::default();
    let (mut best_f, mut best_t) = (f64::NEG_INFINITY, 0);

    let block_sums = |d: &[Vec<f64>], idx: &[usize]| {
        let (mut wp, mut wn) = (vec![0.0; k], vec![0.0; k]);
        for &i in idx {
            for c in 0..k {
                if positive(i, c) {
                    wp[c] += d[i][c];
                } else {
                    wn[c] += d[i][c];
                }
            }
        }
        (wp, wn)
    };
    let all: Vec<usize> = (0..m).collect();

    for t in 1..=config.max_rounds {
        let (tp, tn) = block_sums(&d, &all);
        let sides = |cand: &Candidate| {
            let (pp, pn) = block_sums(&d, &cand.present);
            let ap: Vec<f64> = (0..k).map(|c| tp[c] - pp[c]).collect();
            let an: Vec<f64> = (0..k).map(|c| tn[c] - pn[c]).collect();
            (pp, pn, ap, an)
        };
        let zs: Vec<f64> = cands
            .iter()
            .map(|cand| {
                let (pp, pn, ap, an) = sides(cand);
                z_value(&pp, &pn, &ap, &an, eps)
            })
            .collect();
        let min_z = zs.iter().copied().fold(f64::INFINITY, f64::min);
        let chosen = (0..cands.len())
            .filter(|&j| zs[j] <= min_z * (1.0 + TIE_TOLERANCE))
            .min_by(|&a, &b| cands[a].key.cmp(&cands[b].key))
            .expect("non-empty");
        let cand = &cands[chosen];
        let (pp, pn, ap, an) = sides(cand);
        let votes_present: Vec<f64> = (0..k).map(|c| vote(pp[c], pn[c], eps)).collect();
        let votes_absent: Vec<f64> = (0..k).map(|c| vote(ap[c], an[c], eps)).collect();

        cand.present.iter().for_each(|&i| in_present[i] = true);
        let h = |i: usize| if in_present[i] { &votes_present } else { &votes_absent };
        let mut err = 0.0;
        for i in 0..m {
            for c in 0..k {
                let y = if positive(i, c) { 1.0 } else { -1.0 };
                let hv = h(i)[c];
                if y * hv < 0.0 {
                    err += d[i][c];
                } else if hv == 0.0 {
                    err += 0.5 * d[i][c];
                }
            }
        }
        if err >= 0.5 {
            cand.present.iter().for_each(|&i| in_present[i] = false);
            trace.halted = true;
            break;
        }
        let mut total = 0.0;
        for i in 0..m {
            for c in 0..k {
                let y = if positive(i, c) { 1.0 } else { -1.0 };
                d[i][c] *= (-y * h(i)[c]).exp();
                total += d[i][c];
                train_margin[i][c] += h(i)[c];
            }
        }
        d.iter_mut().flatten().for_each(|w| *w /= total);
        cand.present.iter().for_each(|&i| in_present[i] = false);

        let hyp = WeakHypothesis {
            test: cand.test.clone(),
            votes_present,
            votes_absent,
        };
        let wrong = (0..m).filter(|&i| argmax(&train_margin[i]) != label[i]).count();
        trace.z.push(z_value(&pp, &pn, &ap, &an, eps));
        trace.weighted_error.push(err);
        trace.train_error.push(wrong as f64 / m as f64);
        if !dev.is_empty() {
            let mut correct = 0;
            for (j, (f, l)) in dev.iter().enumerate() {
                let v = hyp.votes(f);
                dev_margin[j].iter_mut().zip(v).for_each(|(a, b)| *a += b);
                if classes[argmax(&dev_margin[j])] == *l {
                    correct += 1;
                }
            }
            // Single-label with one prediction per recipe: micro-F equals accuracy.
            let f = correct as f64 / dev.len() as f64;
            trace.dev_micro_f.push(f);
            if f > best_f {
                best_f = f;
                best_t = t;
            }
        }
        rounds.push(hyp);
        if !dev.is_empty() && t - best_t >= config.dev_patience {
            break;
        }
    }
    if rounds.is_empty() {
        return Err(Error::Training(
            "no weak hypothesis reaches weighted error below 0.5".into(),
        ));
    }
    trace.chosen_rounds = if dev.is_empty() { rounds.len() } else { best_t };
    rounds.truncate(trace.chosen_rounds);
    Ok((
        BoostModel {
            classes,
            schema,
            rounds,
        },
        trace,
    ))
}

pub fn confidence(margin: f64) -> f64 {
    1.0 / (1.0 + (-2.0 * margin).exp())
}

impl BoostModel {
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn schema(&self) -> FeatureSchema {
        self.schema
    }

    pub fn rounds(&self) -> &[WeakHypothesis] {
        &self.rounds
    }

    pub fn truncated(&self, rounds: usize) -> BoostModel {
        BoostModel {
            classes: self.classes.clone(),
            schema: self.schema,
            rounds: self.rounds[..rounds.min(self.rounds.len())].to_vec(),
        }
    }

    pub fn margins(&self, f: &BoostFeatures) -> Result<Vec<f64>> {
        if f.schema != self.schema {
            return Err(Error::SchemaMismatch(format!(
                "model schema {:?}, features {:?}",
                self.schema, f.schema
            )));
        }
        let mut m = vec![0.0; self.classes.len()];
        for h in &self.rounds {
            m.iter_mut().zip(h.votes(f)).for_each(|(a, b)| *a += b);
        }
        Ok(m)
    }

    /// Class with the largest margin; ties go to the earliest class.
    pub fn predict(&self, f: &BoostFeatures) -> Result<&str> {
        Ok(&self.classes[argmax(&self.margins(f)?)])
    }

    pub fn score(&self, recipe_id: &str, f: &BoostFeatures) -> Result<ScoreVector> {
        let m = self.margins(f)?;
        Ok(ScoreVector::from_pairs(
            recipe_id,
            BOOST_METHOD,
            self.classes.iter().zip(m).map(|(c, x)| (c.clone(), confidence(x))),
        ))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("boost-model\tv1\n");
        let s = self.schema;
        let _ = writeln!(
            out,
            "schema\t{}\t{}\t{}\t{}",
            s.title_max_n,
            s.body_max_n,
            s.ingredient_max_n,
            NumericFeatures::NAMES.join(",")
        );
        let _ = writeln!(out, "classes\t{}", self.classes.join("\t"));
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join("\t");
        for h in &self.rounds {
            match &h.test {
                FeatureTest::Text { field, ngram } => {
                    let _ = writeln!(out, "round\t{}\t{ngram}", field.prefix());
                }
                FeatureTest::Numeric { field, threshold } => {
                    let _ = writeln!(out, "round\tnum\t{}\t{threshold}", NumericFeatures::NAMES[*field]);
                }
            }
            let _ = writeln!(out, "present\t{}", fmt(&h.votes_present));
            let _ = writeln!(out, "absent\t{}", fmt(&h.votes_absent));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        const WHAT: &str = "boost model";
        let lines: Vec<&str> = text.lines().collect();
        if lines.first() != Some(&"boost-model\tv1") {
            return Err(Error::SchemaMismatch("not a v1 boost model".into()));
        }
        let bad = |ln: usize, msg: &str| Error::parse(WHAT, ln, msg);
        let cols = |ln: usize| -> Vec<&str> { lines.get(ln - 1).map(|l| l.split('\t').collect()).unwrap_or_default() };
        let sc = cols(2);
        if sc.len() != 5 || sc[0] != "schema" {
            return Err(bad(2, "missing schema line"));
        }
        if sc[4] != NumericFeatures::NAMES.join(",") {
            return Err(Error::SchemaMismatch(format!("unknown numeric fields {}", sc[4])));
        }
        let n = |s: &str| s.parse::<usize>().map_err(|_| bad(2, "bad n-gram size"));
        let schema = FeatureSchema {
            title_max_n: n(sc[1])?,
            body_max_n: n(sc[2])?,
            ingredient_max_n: n(sc[3])?,
        };
        let cl = cols(3);
        if cl.first() != Some(&"classes") {
            return Err(bad(3, "missing classes line"));
        }
        let classes: Vec<String> = cl[1..].iter().map(|s| s.to_string()).collect();
        let floats = |ln: usize, tag: &str| -> Result<Vec<f64>> {
            let c = cols(ln);
            if c.first() != Some(&tag) || c.len() != classes.len() + 1 {
                return Err(bad(ln, "bad vote line"));
            }
            c[1..].iter().map(|s| s.parse::<f64>().map_err(|_| bad(ln, "bad number"))).collect()
        };
        let mut rounds = Vec::new();
        let mut ln = 4;
        while ln <= lines.len() {
            let c = cols(ln);
            let test = match c[..] {
                ["round", "num", name, th] => FeatureTest::Numeric {
                    field: NumericFeatures::NAMES
                        .iter()
                        .position(|x| *x == name)
                        .ok_or_else(|| Error::SchemaMismatch(format!("unknown numeric field {name}")))?,
                    threshold: th.parse().map_err(|_| bad(ln, "bad threshold"))?,
                },
                ["round", prefix, ngram] => FeatureTest::Text {
                    field: TextField::from_prefix(prefix)
                        .ok_or_else(|| Error::SchemaMismatch(format!("unknown text field {prefix}")))?,
                    ngram: ngram.to_owned(),
                },
                _ => return Err(bad(ln, "expected round header")),
            };
            rounds.push(WeakHypothesis {
                test,
                votes_present: floats(ln + 1, "present")?,
                votes_absent: floats(ln + 2, "absent")?,
            });
            ln += 3;
        }
        if rounds.is_empty() {
            return Err(bad(lines.len(), "model has no rounds"));
        }
        Ok(BoostModel {
            classes,
            schema,
            rounds,
        })
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn feat(title: &[&str], body: &[&str], numeric: [f64; 5]) -> BoostFeatures {
        BoostFeatures {
            schema: FeatureSchema::default(),
            title: title.iter().map(|s| s.to_string()).collect(),
            body: body.iter().map(|s| s.to_string()).collect(),
            ingredients: BTreeSet::new(),
            numeric,
        }
    }

    fn separable() -> Vec<(BoostFeatures, &'static str)> {
        let mut out = Vec::new();
        for i in 0..4 {
            out.push((feat(&["gateau"], &["sucre", "four"], [i as f64, 3.0, 1.0, 0.0, 0.0]), "dessert"));
            out.push((feat(&["salade"], &["sel", "four"], [i as f64, 3.0, 1.0, 0.0, 0.0]), "entree"));
        }
        out
    }

    #[test]
    fn one_stump_separates() {
        let train = separable();
        let cfg = BoostConfig {
            max_rounds: 1,
            ..BoostConfig::default()
        };
        let (m, trace) = train_boost(&train, &[], &cfg).unwrap();
        assert_eq!(trace.train_error, vec![0.0]);
        assert!(trace.weighted_error[0] < 0.5);
        // Ties between the four perfect tests go to the smallest key.
        assert_eq!(m.rounds()[0].test.key(), "body:sel");
        for (f, l) in &train {
            assert_eq!(m.predict(f).unwrap(), *l);
        }
    }

    #[test]
    fn confidence_mapping() {
        assert_eq!(confidence(0.0), 0.5);
        assert!(confidence(30.0) > 0.999_999);
        assert!(confidence(-30.0) < 1e-6);
        let m = BoostModel {
            classes: vec!["a".into(), "b".into()],
            schema: FeatureSchema::default(),
            rounds: vec![],
        };
        let sv = m.score("r", &feat(&[], &[], [0.0; 5])).unwrap();
        assert!(sv.scores.values().all(|&s| s == 0.5));
    }

    #[test]
    fn schema_mismatch_is_reported() {
        let (m, _) = train_boost(&separable(), &[], &BoostConfig::default()).unwrap();
        let mut f = feat(&["gateau"], &[], [0.0; 5]);
        f.schema.body_max_n = 2;
        assert!(matches!(m.score("r", &f), Err(Error::SchemaMismatch(_))));
    }

    #[test]
    fn training_errors() {
        let one: Vec<_> = separable().into_iter().filter(|(_, l)| *l == "dessert").collect();
        assert!(matches!(train_boost(&one, &[], &BoostConfig::default()), Err(Error::Training(_))));
        assert!(matches!(train_boost(&[], &[], &BoostConfig::default()), Err(Error::Training(_))));
        let zero = BoostConfig {
            max_rounds: 0,
            ..BoostConfig::default()
        };
        assert!(matches!(train_boost(&separable(), &[], &zero), Err(Error::Config(_))));
    }

    #[test]
    fn numeric_stumps_split_at_midpoints() {
        let train: Vec<_> = (0..6)
            .map(|i| {
                let l = if i < 3 { "facile" } else { "difficile" };
                (feat(&[], &[], [0.0, 10.0 * i as f64, 0.0, 0.0, 0.0]), l)
            })
            .collect();
        let (m, _) = train_boost(&train, &[], &BoostConfig { max_rounds: 1, ..Default::default() }).unwrap();
        assert_eq!(
            m.rounds()[0].test,
            FeatureTest::Numeric {
                field: 1,
                threshold: 25.0
            }
        );
        assert_eq!(m.rounds()[0].test.key(), "num:body_word_count:25");
    }

    #[test]
    fn dev_early_stopping_picks_first_best_round() {
        let train = separable();
        let dev = separable();
        let cfg = BoostConfig {
            max_rounds: 20,
            smoothing_epsilon: None,
            dev_patience: 3,
        };
        let (m, trace) = train_boost(&train, &dev, &cfg).unwrap();
        assert_eq!(trace.chosen_rounds, 1);
        assert_eq!(m.rounds().len(), 1);
        assert_eq!(trace.dev_micro_f.len(), 4);
    }

    #[test]
    fn text_roundtrip() {
        let mut train = separable();
        train[0].0.ingredients.insert("sucre".into());
        train[2].0.ingredients.insert("sucre".into());
        let (m, _) = train_boost(&train, &[], &BoostConfig { max_rounds: 6, ..Default::default() }).unwrap();
        let text = m.to_text();
        assert_eq!(BoostModel::from_text(&text).unwrap(), m);
        assert!(BoostModel::from_text("boost-model\tv2\n").is_err());
    }

    fn noisy() -> impl Strategy<Value = Vec<(BoostFeatures, &'static str)>> {
        let words = prop_oneof![Just("a"), Just("b"), Just("c"), Just("d"), Just("e")];
        let doc = (
            proptest::collection::vec(words.clone(), 0..3),
            proptest::collection::vec(words, 0..4),
            0u8..5,
            prop_oneof![Just("x"), Just("y"), Just("z")],
        );
        proptest::collection::vec(doc, 6..20).prop_map(|docs| {
            docs.into_iter()
                .map(|(t, b, n, l)| (feat(&t, &b, [n as f64, 0.0, 0.0, 0.0, 0.0]), l))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn loss_bound_and_errors(train in noisy()) {
            prop_assume!(train.iter().map(|(_, l)| *l).collect::<BTreeSet<_>>().len() >= 2);
            let cfg = BoostConfig { max_rounds: 30, ..Default::default() };
            let Ok((m, trace)) = train_boost(&train, &[], &cfg) else { return Ok(()); };
            let mut bound = 1.0;
            for (&z, &e) in trace.z.iter().zip(&trace.weighted_error) {
                prop_assert!(z <= 1.0 + 1e-12);
                prop_assert!(e < 0.5);
                let next = bound * z;
                prop_assert!(next <= bound * (1.0 + 1e-12));
                bound = next;
            }
            let again = train_boost(&train, &[], &cfg).unwrap().0;
            prop_assert_eq!(again.to_text(), m.to_text());
            for (f, _) in &train {
                let margins = m.margins(f).unwrap();
                let conf = m.score("r", f).unwrap();
                let mi = argmax(&margins);
                let ci = argmax(&conf.scores.values().copied().collect::<Vec<_>>());
                prop_assert!(margins[ci] == margins[mi] || conf.scores.values().nth(mi) == conf.scores.values().nth(ci));
            }
        }
    }
}
