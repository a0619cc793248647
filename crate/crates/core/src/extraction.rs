//! Lexicon-based ingredient extraction with generic-term resolution.
//!
//! The lexicon holds every normalized gold ingredient form seen in training,
//! with trailing `s`/`x` plural folds. Recipe text is scanned with the longest
//! lexicon match over 3-, 2- and 1-token windows. Generic words (meat,
//! cheese, fish) are never emitted as such; each one found in the text is
//! replaced by the specific ingredient that co-occurs most with the other
//! candidates in training gold lists, when there is any evidence.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::corpus::{Corpus, Recipe};
use crate::error::{Error, Result};
use crate::textnorm::Normalizer;

pub const GENERIC_TERMS: [&str; 3] = ["fromage", "poisson", "viande"];
pub const MAX_MATCH_TOKENS: usize = 3;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IngredientLexicon {
    /// Every matchable surface form mapped to its output form.
    surfaces: BTreeMap<String, String>,
    generics: BTreeSet<String>,
    /// generic -> specific -> training recipes with the specific in gold and
    /// the generic in the text.
    specializations: BTreeMap<String, BTreeMap<String, usize>>,
    /// Unordered pair (smaller first) -> training gold lists holding both.
    cooccurrence: BTreeMap<(String, String), usize>,
}

fn plural_variants(form: &str) -> Vec<String> {
    let mut out = vec![form.to_owned(), format!("{form}s"), format!("{form}x")];
    if let Some(stem) = form.strip_suffix(['s', 'x']) {
        if !stem.is_empty() {
            out.push(stem.to_owned());
        }
    }
    out
}

fn normalized_form(text: &str, normalizer: &Normalizer) -> String {
    normalizer.base_tokens(text).join(" ")
}

impl IngredientLexicon {
    pub fn entries(&self) -> impl Iterator<Item = &str> {
        self.surfaces.keys().map(String::as_str)
    }

    pub fn canonical(&self, surface: &str) -> Option<&str> {
        self.surfaces.get(surface).map(String::as_str)
    }

    pub fn generics(&self) -> &BTreeSet<String> {
        &self.generics
    }

    pub fn specializations(&self, generic: &str) -> Option<&BTreeMap<String, usize>> {
        self.specializations.get(generic)
    }

    pub fn cooccurrence(&self, a: &str, b: &str) -> usize {
        if a == b {
            return 0;
        }
        let key = if a < b { (a, b) } else { (b, a) };
        self.cooccurrence
            .get(&(key.0.to_owned(), key.1.to_owned()))
            .copied()
            .unwrap_or(0)
    }

    /// Generic named by `token`, allowing a plural ending.
    pub fn generic_of(&self, token: &str) -> Option<&str> {
        self.generics
            .iter()
            .find(|g| plural_variants(g).iter().take(3).any(|v| v == token))
            .map(String::as_str)
    }

    /// Output forms a recipe may receive: lexicon forms plus specifics.
    pub fn closed_world(&self) -> BTreeSet<&str> {
        let mut out: BTreeSet<&str> = self.surfaces.values().map(String::as_str).collect();
        for spec in self.specializations.values() {
            out.extend(spec.keys().map(String::as_str));
        }
        out
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for g in &self.generics {
            let _ = writeln!(out, "generic\t{g}");
        }
        for (s, c) in &self.surfaces {
            let _ = writeln!(out, "entry\t{s}\t{c}");
        }
        for (g, m) in &self.specializations {
            for (x, n) in m {
                let _ = writeln!(out, "spec\t{g}\t{x}\t{n}");
            }
        }
        for ((a, b), n) in &self.cooccurrence {
            let _ = writeln!(out, "cooc\t{a}\t{b}\t{n}");
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        const WHAT: &str = "ingredient lexicon";
        let mut lex = IngredientLexicon::default();
        for (i, line) in text.lines().enumerate() {
            let ln = i + 1;
            let count = |s: &str| s.parse::<usize>().map_err(|_| Error::parse(WHAT, ln, "bad count"));
            match line.split('\t').collect::<Vec<_>>()[..] {
                ["generic", g] => {
                    lex.generics.insert(g.to_owned());
                }
                ["entry", s, c] => {
                    lex.surfaces.insert(s.to_owned(), c.to_owned());
                }
                ["spec", g, x, n] => {
                    lex.specializations
                        .entry(g.to_owned())
                        .or_default()
                        .insert(x.to_owned(), count(n)?);
                }
                ["cooc", a, b, n] if a < b => {
                    lex.cooccurrence.insert((a.to_owned(), b.to_owned()), count(n)?);
                }
                _ => return Err(Error::parse(WHAT, ln, "unexpected line")),
            }
        }
        Ok(lex)
    }
}

pub fn build_lexicon(train: &Corpus, normalizer: &Normalizer) -> Result<IngredientLexicon> {
    build_lexicon_with_generics(train, normalizer, &GENERIC_TERMS)
}

pub fn build_lexicon_with_generics(
    train: &Corpus,
    normalizer: &Normalizer,
    generics: &[&str],
) -> Result<IngredientLexicon> {
    let generics: BTreeSet<String> = generics.iter().map(|g| normalized_form(g, normalizer)).collect();
    let is_generic = |form: &str| generics.iter().any(|g| plural_variants(g).iter().take(3).any(|v| v == form));

    let golds: Vec<(&Recipe, Vec<String>)> = train
        .recipes()
        .iter()
        .filter_map(|r| {
            let gold = r.gold_ingredients.as_ref()?;
            let forms = gold
                .iter()
                .map(|g| normalized_form(g, normalizer))
                .filter(|f| !f.is_empty() && !is_generic(f))
                .collect();
            Some((r, forms))
        })
        .collect();
    if golds.is_empty() {
        return Err(Error::Training("no training recipe carries a gold ingredient list".into()));
    }

    let seen: BTreeSet<&str> = golds.iter().flat_map(|(_, f)| f.iter().map(String::as_str)).collect();
    let canonical_of = |form: &str| -> String {
        match form.strip_suffix(['s', 'x']) {
            Some(stem) if seen.contains(stem) => stem.to_owned(),
            _ => form.to_owned(),
        }
    };
    let mut surfaces: BTreeMap<String, String> = BTreeMap::new();
    for &form in &seen {
        let canon = canonical_of(form);
        for v in plural_variants(form) {
            if is_generic(&v) {
                continue;
            }
            // A seen form always keeps its own canonical; variants take the
            // smallest candidate.
            let own = seen.contains(v.as_str()).then(|| canonical_of(&v));
            let slot = surfaces.entry(v).or_insert_with(|| canon.clone());
            if let Some(own) = own {
                *slot = own;
            } else if canon < *slot {
                *slot = canon.clone();
            }
        }
    }

    let mut specializations: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    let mut cooccurrence: BTreeMap<(String, String), usize> = BTreeMap::new();
    for (recipe, forms) in &golds {
        let items: BTreeSet<String> = forms.iter().map(|f| surfaces[f].clone()).collect();
        let text: BTreeSet<String> = normalizer
            .base_tokens(&recipe.title)
            .into_iter()
            .chain(normalizer.base_tokens(&recipe.body))
            .collect();
        for g in &generics {
            if plural_variants(g).iter().take(3).any(|v| text.contains(v)) {
                let table = specializations.entry(g.clone()).or_default();
                for x in &items {
                    *table.entry(x.clone()).or_default() += 1;
                }
            }
        }
        let items: Vec<&String> = items.iter().collect();
        for (i, a) in items.iter().enumerate() {
            for b in &items[i + 1..] {
                *cooccurrence.entry(((*a).clone(), (*b).clone())).or_default() += 1;
            }
        }
    }
    Ok(IngredientLexicon {
        surfaces,
        generics,
        specializations,
        cooccurrence,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub ingredient: String,
    pub confidence: f64,
}

/// Sorted by confidence descending, then ingredient; no duplicates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CandidateList {
    items: Vec<Candidate>,
}

impl CandidateList {
    pub fn new(items: impl IntoIterator<Item = Candidate>) -> Self {
        let mut by_name: BTreeMap<String, f64> = BTreeMap::new();
        for c in items {
            let slot = by_name.entry(c.ingredient).or_insert(c.confidence);
            *slot = slot.max(c.confidence);
        }
        let mut items: Vec<Candidate> = by_name
            .into_iter()
            .map(|(ingredient, confidence)| Candidate {
                ingredient,
                confidence,
            })
            .collect();
        items.sort_by(|a, b| {
            b.confidence
                .total_cmp(&a.confidence)
                .then_with(|| a.ingredient.cmp(&b.ingredient))
        });
        CandidateList { items }
    }

    pub fn items(&self) -> &[Candidate] {
        &self.items
    }

    pub fn ingredients(&self) -> Vec<&str> {
        self.items.iter().map(|c| c.ingredient.as_str()).collect()
    }

    pub fn contains(&self, ingredient: &str) -> bool {
        self.items.iter().any(|c| c.ingredient == ingredient)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scan {
    pub candidates: CandidateList,
    pub generics: BTreeSet<String>,
}

/// Longest-match scan of one token stream. Returns matched output forms (with
/// repeats) and generic words met outside any match.
pub fn match_tokens(tokens: &[String], lexicon: &IngredientLexicon) -> (Vec<String>, BTreeSet<String>) {
    let mut hits = Vec::new();
    let mut generics = BTreeSet::new();
    let mut i = 0;
    'scan: while i < tokens.len() {
        for n in (1..=MAX_MATCH_TOKENS.min(tokens.len() - i)).rev() {
            if let Some(canon) = lexicon.canonical(&tokens[i..i + n].join(" ")) {
                hits.push(canon.to_owned());
                i += n;
                continue 'scan;
            }
        }
        if let Some(g) = lexicon.generic_of(&tokens[i]) {
            generics.insert(g.to_owned());
        }
        i += 1;
    }
    (hits, generics)
}

pub fn base_confidence(tf: usize) -> f64 {
    (tf as f64 / 2.0 + 0.5).min(1.0)
}

pub fn extract_candidates(recipe: &Recipe, lexicon: &IngredientLexicon, normalizer: &Normalizer) -> Scan {
    let mut tf: BTreeMap<String, usize> = BTreeMap::new();
    let mut generics = BTreeSet::new();
    for text in [&recipe.title, &recipe.body] {
        let (hits, g) = match_tokens(&normalizer.base_tokens(text), lexicon);
        for h in hits {
            *tf.entry(h).or_default() += 1;
        }
        generics.extend(g);
    }
    let candidates = CandidateList::new(tf.into_iter().map(|(ingredient, n)| Candidate {
        ingredient,
        confidence: base_confidence(n),
    }));
    Scan { candidates, generics }
}

/// Smoothed `p(x | candidates)` over the generic's specifics, with the
/// unsmoothed evidence count of each.
pub fn generic_posterior(
    generic: &str,
    candidates: &CandidateList,
    lexicon: &IngredientLexicon,
) -> BTreeMap<String, (f64, usize)> {
    let Some(specifics) = lexicon.specializations(generic) else {
        return BTreeMap::new();
    };
    let counts: BTreeMap<&str, usize> = specifics
        .keys()
        .map(|x| {
            let n = candidates
                .items()
                .iter()
                .map(|c| lexicon.cooccurrence(x, &c.ingredient))
                .sum();
            (x.as_str(), n)
        })
        .collect();
    let total: usize = counts.values().sum();
    let denom = (total + counts.len()) as f64;
    counts
        .into_iter()
        .map(|(x, n)| (x.to_owned(), ((n + 1) as f64 / denom, n)))
        .collect()
}

pub fn resolve_generics(
    candidates: &CandidateList,
    generics: &BTreeSet<String>,
    lexicon: &IngredientLexicon,
) -> CandidateList {
    let mut items = candidates.items().to_vec();
    for g in generics {
        let posterior = generic_posterior(g, candidates, lexicon);
        let mut best: Option<(&str, f64, usize)> = None;
        for (x, &(p, n)) in &posterior {
            if best.is_none_or(|(_, bp, _)| p > bp) {
                best = Some((x, p, n));
            }
        }
        if let Some((x, p, n)) = best {
            if n > 0 && !items.iter().any(|c| c.ingredient == x) {
                items.push(Candidate {
                    ingredient: x.to_owned(),
                    confidence: p,
                });
            }
        }
    }
    CandidateList::new(items)
}

pub fn extract(recipe: &Recipe, lexicon: &IngredientLexicon, normalizer: &Normalizer) -> CandidateList {
    let scan = extract_candidates(recipe, lexicon, normalizer);
    resolve_generics(&scan.candidates, &scan.generics, lexicon)
}

/// `recipe_id<TAB>rank<TAB>ingredient<TAB>confidence`, ranks from 1.
pub fn write_run<'a>(lists: impl IntoIterator<Item = (&'a str, &'a CandidateList)>) -> String {
    let mut out = String::new();
    for (id, list) in lists {
        for (rank, c) in list.items().iter().enumerate() {
            let _ = writeln!(out, "{id}\t{}\t{}\t{:.6}", rank + 1, c.ingredient, c.confidence);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::corpus::LabelKind;

    fn recipe(id: &str, title: &str, body: &str, gold: &[&str]) -> Recipe {
        let mut r = Recipe::new(id, title, body);
        r.gold_ingredients = Some(gold.iter().map(|s| s.to_string()).collect());
        r
    }

    fn corpus(recipes: Vec<Recipe>) -> Corpus {
        Corpus::new(recipes, LabelKind::None).unwrap()
    }

    fn training() -> Corpus {
        corpus(vec![
            recipe("1", "Tartiflette", "Cuire la viande avec les lardons.", &["lardons", "jambon", "oignon"]),
            recipe("2", "Quiche", "Battre les oeufs, ajouter la crème fraîche.", &["oeufs", "crème fraîche", "lardons"]),
            recipe("3", "Omelette", "Battre l'oeuf.", &["oeuf", "sel"]),
            recipe("4", "Gratin", "Râper le fromage sur les pommes de terre.", &["gruyère", "pommes de terre", "reblochon"]),
        ])
    }

    #[test]
    fn plural_folds_share_one_output_form() {
        let lex = build_lexicon(&training(), &Normalizer::default()).unwrap();
        assert_eq!(lex.canonical("oeuf"), Some("oeuf"));
        assert_eq!(lex.canonical("oeufs"), Some("oeuf"));
        assert_eq!(lex.canonical("oignons"), Some("oignon"));
        assert_eq!(lex.canonical("lardon"), Some("lardons"));
        assert_eq!(lex.canonical("viande"), None);
    }

    #[test]
    fn specializations_count_text_generics() {
        let lex = build_lexicon(&training(), &Normalizer::default()).unwrap();
        let viande = lex.specializations("viande").unwrap();
        assert_eq!(viande.get("jambon"), Some(&1));
        assert_eq!(viande.get("lardons"), Some(&1));
        assert!(lex.specializations("poisson").is_none());
        assert_eq!(lex.cooccurrence("lardons", "oeuf"), 1);
        assert_eq!(lex.cooccurrence("lardons", "lardons"), 0);
    }

    #[test]
    fn direct_and_multiword_hits() {
        let norm = Normalizer::default();
        let lex = build_lexicon(&training(), &norm).unwrap();
        let r = Recipe::new("x", "Soupe", "Ajouter la crème fraîche et les oignons, puis l'oignon.");
        let scan = extract_candidates(&r, &lex, &norm);
        assert_eq!(scan.candidates.ingredients(), vec!["crème fraîche", "oignon"]);
        assert_eq!(scan.candidates.items()[1].confidence, 1.0);
        let none = Recipe::new("y", "Rien", "mélanger énergiquement tous les ingrédients");
        assert!(extract(&none, &lex, &norm).is_empty());
    }

    #[test]
    fn generic_resolution() {
        let norm = Normalizer::default();
        let lex = build_lexicon(&training(), &norm).unwrap();
        let r = Recipe::new("x", "Croûte", "Ajouter la viande, les lardons et le reblochon.");
        let scan = extract_candidates(&r, &lex, &norm);
        assert_eq!(scan.generics.iter().collect::<Vec<_>>(), vec!["viande"]);
        let out = resolve_generics(&scan.candidates, &scan.generics, &lex);
        assert!(out.contains("jambon"));
        let post = generic_posterior("viande", &scan.candidates, &lex);
        let total: f64 = post.values().map(|(p, _)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        // No evidence at all: nothing is injected.
        let lone = Recipe::new("z", "Plat", "Cuire la viande.");
        assert!(extract(&lone, &lex, &norm).is_empty());
        let no_generic = resolve_generics(&scan.candidates, &BTreeSet::new(), &lex);
        assert_eq!(no_generic, scan.candidates);
    }

    #[test]
    fn lexicon_tsv_roundtrip() {
        let lex = build_lexicon(&training(), &Normalizer::default()).unwrap();
        assert_eq!(IngredientLexicon::from_tsv(&lex.to_tsv()).unwrap(), lex);
    }

    #[test]
    fn needs_gold_lists() {
        let c = corpus(vec![Recipe::new("1", "a", "b")]);
        assert!(build_lexicon(&c, &Normalizer::default()).is_err());
    }

    #[test]
    fn run_format() {
        let list = CandidateList::new([
            Candidate { ingredient: "sel".into(), confidence: 1.0 },
            Candidate { ingredient: "jambon".into(), confidence: 0.4 },
            Candidate { ingredient: "beurre".into(), confidence: 1.0 },
        ]);
        assert_eq!(
            write_run([("7", &list)]),
            "7\t1\tbeurre\t1.000000\n7\t2\tsel\t1.000000\n7\t3\tjambon\t0.400000\n"
        );
    }

    proptest! {
        #[test]
        fn closed_world_deterministic_and_monotone(
            words in proptest::collection::vec(
                prop_oneof![
                    Just("viande"), Just("lardons"), Just("oeufs"), Just("crème"), Just("fraîche"),
                    Just("sel"), Just("fromage"), Just("gruyère"), Just("pommes"), Just("de"), Just("terre"),
                    Just("et"), Just("cuire")
                ],
                0..25)
        ) {
            let norm = Normalizer::default();
            let lex = build_lexicon(&training(), &norm).unwrap();
            let r = Recipe::new("p", "t", words.join(" "));
            let scan = extract_candidates(&r, &lex, &norm);
            let out = extract(&r, &lex, &norm);
            let world = lex.closed_world();
            prop_assert!(out.ingredients().iter().all(|i| world.contains(i)));
            prop_assert_eq!(&out, &extract(&r, &lex, &norm));
            for c in scan.candidates.ingredients() {
                prop_assert!(out.contains(c));
            }
            for g in &scan.generics {
                let post = generic_posterior(g, &scan.candidates, &lex);
                if !post.is_empty() {
                    let total: f64 = post.values().map(|(p, _)| p).sum();
                    prop_assert!((total - 1.0).abs() < 1e-12);
                }
            }
        }
    }
}
