//! Gini-weighted cosine classifier, flat and hierarchical.
//!
//! Recipe weights are `tf * idf * G`, class weights `df_c * idf * G`, over
//! the vocabulary of terms whose Gini index reaches the threshold.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::{Corpus, Recipe};
use crate::error::{Error, Result};
use crate::features::{
    build_stats_with_labels, gini_class_vector, recipe_terms, Feed, LexiconStats, SparseVector,
    TermCounts,
};
use crate::fusion::{normalize_scores, ScoreVector};
use crate::textnorm::Normalizer;

pub const COSINE_METHOD: &str = "cosine";
pub const HIERARCHICAL_METHOD: &str = "hierarchical";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DenominatorMode {
    /// Product of both vectors' norms over their full support.
    #[default]
    Standard,
    /// `sqrt(sum_t w_r(t)^2 * w_c(t)^2)` over the shared support.
    Literal,
}

impl DenominatorMode {
    pub fn name(self) -> &'static str {
        match self {
            DenominatorMode::Standard => "standard",
            DenominatorMode::Literal => "literal",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "standard" => Some(DenominatorMode::Standard),
            "literal" => Some(DenominatorMode::Literal),
            _ => None,
        }
    }
}

/// Extra per-class document counts for chosen terms (title enrichment).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermBoost {
    pub term: String,
    pub class: String,
    pub extra_df: usize,
}

/// `term<TAB>class<TAB>count` lines; `#` comments allowed.
pub fn parse_boosts(text: &str) -> Result<Vec<TermBoost>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let [term, class, count] = cols[..] else {
            return Err(Error::parse("boost file", i + 1, "expected term<TAB>class<TAB>count"));
        };
        let extra_df = count
            .trim()
            .parse()
            .map_err(|_| Error::parse("boost file", i + 1, format!("bad count {count:?}")))?;
        out.push(TermBoost {
            term: term.to_owned(),
            class: class.to_owned(),
            extra_df,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CosineModel {
    classes: Vec<String>,
    class_vectors: Vec<SparseVector>,
    /// `idf * G` for every surviving term.
    term_weights: BTreeMap<String, f64>,
    gini_threshold: f64,
    mode: DenominatorMode,
}

pub fn train_cosine(
    stats: &LexiconStats,
    gini_threshold: f64,
    mode: DenominatorMode,
    boosts: &[TermBoost],
) -> Result<CosineModel> {
    if !(0.0..=1.0).contains(&gini_threshold) {
        return Err(Error::Config(format!(
            "gini threshold {gini_threshold} outside [0, 1]"
        )));
    }
    let mut term_weights = BTreeMap::new();
    for term in stats.training_vocabulary() {
        let (g, idf) = (stats.gini(term).expect("training term"), stats.idf(term).expect("known"));
        if g >= gini_threshold {
            term_weights.insert(term.to_owned(), idf * g);
        }
    }
    let mut class_vectors: Vec<SparseVector> = (0..stats.classes().len())
        .map(|c| gini_class_vector(stats, c, gini_threshold))
        .collect();
    for b in boosts {
        let ci = stats
            .class_index(&b.class)
            .ok_or_else(|| Error::Config(format!("boost names unknown class {:?}", b.class)))?;
        if let Some(&w) = term_weights.get(&b.term) {
            let v = &mut class_vectors[ci];
            let updated = v.get(&b.term) + b.extra_df as f64 * w;
            v.insert(b.term.clone(), updated);
        }
    }
    Ok(CosineModel {
        classes: stats.classes().to_vec(),
        class_vectors,
        term_weights,
        gini_threshold,
        mode,
    })
}

impl CosineModel {
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn class_vector(&self, class: &str) -> Option<&SparseVector> {
        self.classes
            .iter()
            .position(|c| c == class)
            .map(|i| &self.class_vectors[i])
    }

    pub fn gini_threshold(&self) -> f64 {
        self.gini_threshold
    }

    pub fn mode(&self) -> DenominatorMode {
        self.mode
    }

    pub fn with_mode(mut self, mode: DenominatorMode) -> Self {
        self.mode = mode;
        self
    }

    /// Classes left with no surviving term; they always score 0.
    pub fn empty_classes(&self) -> Vec<&str> {
        self.classes
            .iter()
            .zip(&self.class_vectors)
            .filter(|(_, v)| v.is_empty())
            .map(|(c, _)| c.as_str())
            .collect()
    }

    pub fn recipe_vector(&self, counts: &TermCounts) -> SparseVector {
        counts
            .iter()
            .filter_map(|(t, &tf)| self.term_weights.get(t).map(|w| (t.clone(), tf as f64 * w)))
            .collect()
    }

    pub fn similarity(&self, recipe: &SparseVector, class: usize) -> f64 {
        let cv = &self.class_vectors[class];
        let mut dot = 0.0;
        let mut literal = 0.0;
        for (t, wr) in recipe.iter() {
            let wc = cv.get(t);
            if wc != 0.0 {
                dot += wr * wc;
                literal += (wr * wr) * (wc * wc);
            }
        }
        if dot == 0.0 {
            return 0.0;
        }
        match self.mode {
            DenominatorMode::Standard => dot / (recipe.norm() * cv.norm()),
            DenominatorMode::Literal => dot / literal.sqrt(),
        }
    }

    pub fn score_counts(&self, recipe_id: &str, counts: &TermCounts) -> ScoreVector {
        let v = self.recipe_vector(counts);
        let scores = self
            .classes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), self.similarity(&v, i)))
            .collect();
        ScoreVector::new(recipe_id, COSINE_METHOD, scores)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "cosine-model\tv1\t{:.16e}\t{}",
            self.gini_threshold,
            self.mode.name()
        );
        let _ = writeln!(out, "classes\t{}", self.classes.join("\t"));
        for (t, w) in &self.term_weights {
            let _ = writeln!(out, "term\t{t}\t{w:.16e}");
        }
        for (c, v) in self.classes.iter().zip(&self.class_vectors) {
            for (t, w) in v.iter() {
                let _ = writeln!(out, "class\t{c}\t{t}\t{w:.16e}");
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        const WHAT: &str = "cosine model";
        let mut lines = text.lines().enumerate();
        let bad = |ln: usize, msg: &str| Error::parse(WHAT, ln, msg);
        let float = |s: &str, ln: usize| s.parse::<f64>().map_err(|_| bad(ln, "bad number"));
        let (_, header) = lines.next().ok_or_else(|| bad(1, "empty model"))?;
        let h: Vec<&str> = header.split('\t').collect();
        if h.len() != 4 || h[0] != "cosine-model" || h[1] != "v1" {
            return Err(Error::SchemaMismatch("not a v1 cosine model".into()));
        }
        let gini_threshold = float(h[2], 1)?;
        let mode = DenominatorMode::parse(h[3]).ok_or_else(|| bad(1, "unknown mode"))?;
        let (_, cl) = lines.next().ok_or_else(|| bad(2, "missing classes"))?;
        let classes: Vec<String> = cl
            .strip_prefix("classes\t")
            .ok_or_else(|| bad(2, "missing classes"))?
            .split('\t')
            .map(str::to_owned)
            .collect();
        let mut class_vectors = vec![SparseVector::new(); classes.len()];
        let mut term_weights = BTreeMap::new();
        for (i, line) in lines {
            let ln = i + 1;
            let cols: Vec<&str> = line.split('\t').collect();
            match cols[..] {
                ["term", t, w] => {
                    term_weights.insert(t.to_owned(), float(w, ln)?);
                }
                ["class", c, t, w] => {
                    let ci = classes
                        .iter()
                        .position(|x| x == c)
                        .ok_or_else(|| bad(ln, "unknown class"))?;
                    class_vectors[ci].insert(t, float(w, ln)?);
                }
                _ => return Err(bad(ln, "unexpected line")),
            }
        }
        Ok(CosineModel {
            classes,
            class_vectors,
            term_weights,
            gini_threshold,
            mode,
        })
    }
}

pub fn score_cosine(
    model: &CosineModel,
    recipe: &Recipe,
    normalizer: &Normalizer,
) -> ScoreVector {
    model.score_counts(&recipe.id, &recipe_terms(recipe, normalizer, Feed::TitleAndBody))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    /// Leaf class to the group it belongs to at this stage.
    pub grouping: BTreeMap<String, String>,
    /// Weight of the title-only feed; `1 - alpha` goes to title+body.
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HierarchySpec {
    pub stages: Vec<Stage>,
}

impl HierarchySpec {
    /// Dessert versus the rest, then starter versus main course.
    pub fn dish_type_default(alpha: f64) -> Self {
        let stage = |pairs: [(&str, &str); 3]| Stage {
            grouping: pairs.iter().map(|&(l, g)| (l.to_owned(), g.to_owned())).collect(),
            alpha,
        };
        HierarchySpec {
            stages: vec![
                stage([("dessert", "dessert"), ("entree", "autre"), ("plat_principal", "autre")]),
                stage([
                    ("dessert", "dessert"),
                    ("entree", "entree"),
                    ("plat_principal", "plat_principal"),
                ]),
            ],
        }
    }

    /// Easy versus hard, then two sub-levels in each group.
    pub fn difficulty_default(alpha: f64) -> Self {
        let leaves = ["tres_facile", "facile", "moyennement_difficile", "difficile"];
        let first = ["facile_groupe", "facile_groupe", "difficile_groupe", "difficile_groupe"];
        HierarchySpec {
            stages: vec![
                Stage {
                    grouping: leaves
                        .iter()
                        .zip(first)
                        .map(|(l, g)| (l.to_string(), g.to_owned()))
                        .collect(),
                    alpha,
                },
                Stage {
                    grouping: leaves.iter().map(|l| (l.to_string(), l.to_string())).collect(),
                    alpha,
                },
            ],
        }
    }

    pub fn leaves(&self) -> Vec<&str> {
        self.stages
            .first()
            .map(|s| s.grouping.keys().map(String::as_str).collect())
            .unwrap_or_default()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(format!("hierarchy: {msg}")));
        let Some(first) = self.stages.first() else {
            return bad("no stages".into());
        };
        let leaves: BTreeSet<&String> = first.grouping.keys().collect();
        for (k, stage) in self.stages.iter().enumerate() {
            if !(0.0..=1.0).contains(&stage.alpha) {
                return bad(format!("stage {} alpha outside [0, 1]", k + 1));
            }
            if stage.grouping.keys().collect::<BTreeSet<_>>() != leaves {
                return bad(format!("stage {} covers a different leaf set", k + 1));
            }
            if k > 0 {
                let parent = &self.stages[k - 1].grouping;
                for (a, ga) in &stage.grouping {
                    for (b, gb) in &stage.grouping {
                        if ga == gb && parent[a] != parent[b] {
                            return bad(format!("stage {} group {ga} straddles two parents", k + 1));
                        }
                    }
                }
            }
        }
        let last = &self.stages[self.stages.len() - 1].grouping;
        let distinct: BTreeSet<&String> = last.values().collect();
        if distinct.len() != last.len() {
            return bad("final stage does not separate every leaf (leaf unreachable)".into());
        }
        Ok(())
    }

    /// `stage <alpha> leaf=group ...` lines; `#` comments allowed.
    pub fn parse(text: &str) -> Result<Self> {
        let mut stages = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            if parts.next() != Some("stage") {
                return Err(Error::parse("hierarchy spec", i + 1, "expected `stage`"));
            }
            let alpha = parts
                .next()
                .and_then(|a| a.parse::<f64>().ok())
                .ok_or_else(|| Error::parse("hierarchy spec", i + 1, "missing alpha"))?;
            let mut grouping = BTreeMap::new();
            for p in parts {
                let (leaf, group) = p
                    .split_once('=')
                    .ok_or_else(|| Error::parse("hierarchy spec", i + 1, "expected leaf=group"))?;
                grouping.insert(leaf.to_owned(), group.to_owned());
            }
            stages.push(Stage { grouping, alpha });
        }
        let spec = HierarchySpec { stages };
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.stages {
            let _ = write!(out, "stage {}", s.alpha);
            for (l, g) in &s.grouping {
                let _ = write!(out, " {l}={g}");
            }
            out.push('\n');
        }
        out
    }

    fn parent_of(&self, stage: usize, leaf: &str) -> Option<&str> {
        (stage > 0).then(|| self.stages[stage - 1].grouping[leaf].as_str())
    }
}

/// One title-only and one title+body model per stage.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchicalModel {
    pub spec: HierarchySpec,
    pub title_models: Vec<CosineModel>,
    pub title_body_models: Vec<CosineModel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HierarchicalOutcome {
    /// Leaf reached by descending the best branch at each stage.
    pub leaf: String,
    /// Product of the normalized stage scores along each leaf's own path.
    pub scores: ScoreVector,
}

pub fn train_hierarchical(
    train: &Corpus,
    full: &Corpus,
    normalizer: &Normalizer,
    spec: &HierarchySpec,
    gini_threshold: f64,
    mode: DenominatorMode,
) -> Result<HierarchicalModel> {
    spec.validate()?;
    let leaves = spec.leaves();
    let mut title_models = Vec::new();
    let mut title_body_models = Vec::new();
    for stage in &spec.stages {
        let labels: Vec<&str> = train
            .recipes()
            .iter()
            .map(|r| {
                let leaf = train
                    .label_of(r)
                    .ok_or_else(|| Error::Training(format!("recipe {} is unlabeled", r.id)))?;
                stage.grouping.get(leaf).map(String::as_str).ok_or_else(|| {
                    Error::Config(format!("hierarchy has no leaf {leaf:?} (leaves {leaves:?})"))
                })
            })
            .collect::<Result<_>>()?;
        for (feed, models) in [
            (Feed::TitleOnly, &mut title_models),
            (Feed::TitleAndBody, &mut title_body_models),
        ] {
            let stats = build_stats_with_labels(train, &labels, full, normalizer, feed)?;
            models.push(train_cosine(&stats, gini_threshold, mode, &[])?);
        }
    }
    Ok(HierarchicalModel {
        spec: spec.clone(),
        title_models,
        title_body_models,
    })
}

impl HierarchicalModel {
    pub fn classify(
        &self,
        recipe_id: &str,
        title: &TermCounts,
        title_body: &TermCounts,
    ) -> HierarchicalOutcome {
        let spec = &self.spec;
        let leaves = spec.leaves();
        // mixed[k][group] = conditional score of the group among its siblings.
        let mut mixed: Vec<BTreeMap<String, f64>> = Vec::new();
        for (k, stage) in spec.stages.iter().enumerate() {
            let raw_t = self.title_models[k].score_counts(recipe_id, title);
            let raw_tb = self.title_body_models[k].score_counts(recipe_id, title_body);
            let mut by_parent: BTreeMap<Option<&str>, BTreeSet<&str>> = BTreeMap::new();
            for leaf in &leaves {
                by_parent
                    .entry(spec.parent_of(k, leaf))
                    .or_default()
                    .insert(stage.grouping[*leaf].as_str());
            }
            let mut stage_scores = BTreeMap::new();
            for siblings in by_parent.values() {
                let pick = |sv: &ScoreVector| {
                    normalize_scores(&ScoreVector::from_pairs(
                        recipe_id,
                        "stage",
                        siblings.iter().map(|&g| (g, sv.get(g).unwrap_or(0.0))),
                    ))
                };
                let (nt, ntb) = (pick(&raw_t), pick(&raw_tb));
                for &g in siblings {
                    let s = stage.alpha * nt.scores[g] + (1.0 - stage.alpha) * ntb.scores[g];
                    stage_scores.insert(g.to_owned(), s);
                }
            }
            mixed.push(stage_scores);
        }

        let scores: BTreeMap<String, f64> = leaves
            .iter()
            .map(|&leaf| {
                let p = spec
                    .stages
                    .iter()
                    .enumerate()
                    .map(|(k, st)| mixed[k][&st.grouping[leaf]])
                    .product();
                (leaf.to_owned(), p)
            })
            .collect();

        let mut candidates: Vec<&str> = leaves.clone();
        for (k, stage) in spec.stages.iter().enumerate() {
            let mut best: Option<(&str, f64)> = None;
            let groups: BTreeSet<&str> =
                candidates.iter().map(|l| stage.grouping[*l].as_str()).collect();
            for g in groups {
                let s = mixed[k][g];
                if best.is_none_or(|(_, b)| s > b) {
                    best = Some((g, s));
                }
            }
            let chosen = best.expect("non-empty").0;
            candidates.retain(|l| stage.grouping[*l] == chosen);
        }
        HierarchicalOutcome {
            leaf: candidates[0].to_owned(),
            scores: ScoreVector::new(recipe_id, HIERARCHICAL_METHOD, scores),
        }
    }

    pub fn classify_recipe(&self, recipe: &Recipe, normalizer: &Normalizer) -> HierarchicalOutcome {
        self.classify(
            &recipe.id,
            &recipe_terms(recipe, normalizer, Feed::TitleOnly),
            &recipe_terms(recipe, normalizer, Feed::TitleAndBody),
        )
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("hierarchical-model\tv1\n");
        for line in self.spec.to_text().lines() {
            let _ = writeln!(out, "spec\t{line}");
        }
        for (k, (t, tb)) in self.title_models.iter().zip(&self.title_body_models).enumerate() {
            for (feed, m) in [("title", t), ("title_body", tb)] {
                for line in m.to_text().lines() {
                    let _ = writeln!(out, "model\t{k}\t{feed}\t{line}");
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some("hierarchical-model\tv1") {
            return Err(Error::SchemaMismatch("not a v1 hierarchical model".into()));
        }
        let mut spec_text = String::new();
        let mut blocks: BTreeMap<(usize, bool), String> = BTreeMap::new();
        for (i, line) in lines.enumerate() {
            if let Some(rest) = line.strip_prefix("spec\t") {
                spec_text.push_str(rest);
                spec_text.push('\n');
            } else if let Some(rest) = line.strip_prefix("model\t") {
                let mut parts = rest.splitn(3, '\t');
                let (Some(k), Some(feed), Some(body)) = (parts.next(), parts.next(), parts.next())
                else {
                    return Err(Error::parse("hierarchical model", i + 2, "bad model line"));
                };
                let k: usize = k
                    .parse()
                    .map_err(|_| Error::parse("hierarchical model", i + 2, "bad stage index"))?;
                let block = blocks.entry((k, feed == "title")).or_default();
                block.push_str(body);
                block.push('\n');
            } else {
                return Err(Error::parse("hierarchical model", i + 2, "unexpected line"));
            }
        }
        let spec = HierarchySpec::parse(&spec_text)?;
        let mut title_models = Vec::new();
        let mut title_body_models = Vec::new();
        for k in 0..spec.stages.len() {
            let get = |title: bool| {
                blocks
                    .get(&(k, title))
                    .ok_or_else(|| Error::SchemaMismatch(format!("stage {k} model missing")))
                    .and_then(|b| CosineModel::from_text(b))
            };
            title_models.push(get(true)?);
            title_body_models.push(get(false)?);
        }
        Ok(HierarchicalModel {
            spec,
            title_models,
            title_body_models,
        })
    }
}
