//! Recipe collections: the XML data model and deterministic stratified splits.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::rng;

/// Four-level difficulty scale, declared in ordinal order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Difficulty {
    TresFacile,
    Facile,
    MoyennementDifficile,
    Difficile,
}

impl Difficulty {
    pub const ALL: [Difficulty; 4] = [
        Difficulty::TresFacile,
        Difficulty::Facile,
        Difficulty::MoyennementDifficile,
        Difficulty::Difficile,
    ];

    /// Position on the scale; contiguous levels are one apart.
    pub fn rank(self) -> u8 {
        self as u8
    }

    /// Class identifier used by classifiers and run files.
    pub fn id(self) -> &'static str {
        match self {
            Difficulty::TresFacile => "tres_facile",
            Difficulty::Facile => "facile",
            Difficulty::MoyennementDifficile => "moyennement_difficile",
            Difficulty::Difficile => "difficile",
        }
    }

    pub fn xml_label(self) -> &'static str {
        match self {
            Difficulty::TresFacile => "Très facile",
            Difficulty::Facile => "Facile",
            Difficulty::MoyennementDifficile => "Moyennement difficile",
            Difficulty::Difficile => "Difficile",
        }
    }

    pub fn from_xml_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.xml_label() == s)
    }

    pub fn from_id(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.id() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DishType {
    Entree,
    PlatPrincipal,
    Dessert,
}

impl DishType {
    pub const ALL: [DishType; 3] = [DishType::Entree, DishType::PlatPrincipal, DishType::Dessert];

    pub fn id(self) -> &'static str {
        match self {
            DishType::Entree => "entree",
            DishType::PlatPrincipal => "plat_principal",
            DishType::Dessert => "dessert",
        }
    }

    pub fn xml_label(self) -> &'static str {
        match self {
            DishType::Entree => "Entrée",
            DishType::PlatPrincipal => "Plat principal",
            DishType::Dessert => "Dessert",
        }
    }

    pub fn from_xml_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.xml_label() == s)
    }

    pub fn from_id(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.id() == s)
    }
}

/// Which gold label a corpus is required to carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LabelKind {
    Difficulty,
    DishType,
    None,
}

impl LabelKind {
    /// Every class identifier of the task, sorted lexicographically.
    pub fn class_ids(self) -> Vec<&'static str> {
        let mut ids: Vec<&'static str> = match self {
            LabelKind::Difficulty => Difficulty::ALL.iter().map(|d| d.id()).collect(),
            LabelKind::DishType => DishType::ALL.iter().map(|d| d.id()).collect(),
            LabelKind::None => Vec::new(),
        };
        ids.sort_unstable();
        ids
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recipe {
    pub id: String,
    pub title: String,
    pub body: String,
    pub difficulty: Option<Difficulty>,
    pub dish_type: Option<DishType>,
    pub gold_ingredients: Option<Vec<String>>,
}

impl Recipe {
    pub fn new(id: impl Into<String>, title: impl Into<String>, body: impl Into<String>) -> Self {
        Recipe {
            id: id.into(),
            title: title.into(),
            body: body.into(),
            difficulty: None,
            dish_type: None,
            gold_ingredients: None,
        }
    }

    pub fn label(&self, kind: LabelKind) -> Option<&'static str> {
        match kind {
            LabelKind::Difficulty => self.difficulty.map(Difficulty::id),
            LabelKind::DishType => self.dish_type.map(DishType::id),
            LabelKind::None => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    recipes: Vec<Recipe>,
    label_kind: LabelKind,
}

impl Corpus {
    /// Validates ids, non-empty text and label coverage.
    pub fn new(recipes: Vec<Recipe>, label_kind: LabelKind) -> Result<Self> {
        if recipes.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut seen = HashSet::new();
        for r in &recipes {
            if r.id.trim().is_empty() {
                return Err(Error::Schema("recipe with empty id".into()));
            }
            if !seen.insert(r.id.as_str()) {
                return Err(Error::Schema(format!("duplicate recipe id {:?}", r.id)));
            }
            if r.title.trim().is_empty() {
                return Err(Error::Schema(format!("recipe {}: empty title", r.id)));
            }
            if r.body.trim().is_empty() {
                return Err(Error::Schema(format!("recipe {}: empty body", r.id)));
            }
            if label_kind != LabelKind::None && r.label(label_kind).is_none() {
                return Err(Error::Schema(format!(
                    "recipe {}: missing {:?} label",
                    r.id, label_kind
                )));
            }
        }
        Ok(Corpus {
            recipes,
            label_kind,
        })
    }

    pub fn recipes(&self) -> &[Recipe] {
        &self.recipes
    }

    pub fn len(&self) -> usize {
        self.recipes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.recipes.is_empty()
    }

    pub fn label_kind(&self) -> LabelKind {
        self.label_kind
    }

    pub fn get(&self, id: &str) -> Option<&Recipe> {
        self.recipes.iter().find(|r| r.id == id)
    }

    /// Gold label of a recipe under this corpus' label kind.
    pub fn label_of(&self, recipe: &Recipe) -> Option<&'static str> {
        recipe.label(self.label_kind)
    }

    /// Distinct gold labels present, sorted.
    pub fn classes(&self) -> Vec<String> {
        let mut v: Vec<String> = self
            .recipes
            .iter()
            .filter_map(|r| r.label(self.label_kind))
            .map(str::to_owned)
            .collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn class_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for label in self.recipes.iter().filter_map(|r| r.label(self.label_kind)) {
            *counts.entry(label.to_owned()).or_insert(0) += 1;
        }
        counts
    }

    /// Same recipes viewed under another label kind.
    pub fn with_label_kind(&self, kind: LabelKind) -> Result<Corpus> {
        Corpus::new(self.recipes.clone(), kind)
    }

    fn subset(&self, indices: &[usize]) -> Result<Corpus> {
        let recipes = indices.iter().map(|&i| self.recipes[i].clone()).collect();
        Corpus::new(recipes, self.label_kind)
    }

    pub fn to_xml(&self) -> String {
        let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<recettes>\n");
        for r in &self.recipes {
            let _ = writeln!(out, "  <recette id=\"{}\">", escape(&r.id));
            let _ = writeln!(out, "    <titre>{}</titre>", escape(&r.title));
            if let Some(d) = r.difficulty {
                let _ = writeln!(out, "    <niveau>{}</niveau>", escape(d.xml_label()));
            }
            if let Some(t) = r.dish_type {
                let _ = writeln!(out, "    <type>{}</type>", escape(t.xml_label()));
            }
            if let Some(items) = &r.gold_ingredients {
                out.push_str("    <ingredients>\n");
                for item in items {
                    let _ = writeln!(out, "      <ingredient>{}</ingredient>", escape(item));
                }
                out.push_str("    </ingredients>\n");
            }
            let _ = writeln!(out, "    <preparation>{}</preparation>", escape(&r.body));
            out.push_str("  </recette>\n");
        }
        out.push_str("</recettes>\n");
        out
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(ch),
        }
    }
    out
}

pub fn load_corpus(path: impl AsRef<Path>, label_kind: LabelKind) -> Result<Corpus> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text, label_kind)
}

pub fn parse_corpus(xml: &str, label_kind: LabelKind) -> Result<Corpus> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| Error::Xml(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "recettes" {
        return Err(Error::Schema(format!(
            "root element is <{}>, expected <recettes>",
            root.tag_name().name()
        )));
    }
    let mut recipes = Vec::new();
    for node in root.children().filter(|n| n.is_element()) {
        if node.tag_name().name() != "recette" {
            return Err(Error::Schema(format!(
                "unexpected element <{}> under <recettes>",
                node.tag_name().name()
            )));
        }
        recipes.push(parse_recipe(node)?);
    }
    Corpus::new(recipes, label_kind)
}

fn element_text(node: roxmltree::Node<'_, '_>) -> String {
    node.descendants()
        .filter(|n| n.is_text())
        .filter_map(|n| n.text())
        .collect::<String>()
        .trim()
        .to_owned()
}

fn parse_recipe(node: roxmltree::Node<'_, '_>) -> Result<Recipe> {
    let id = node
        .attribute("id")
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .ok_or_else(|| Error::Schema("<recette> without id attribute".into()))?
        .to_owned();
    let mut title = None;
    let mut body = None;
    let mut recipe = Recipe::new(id.clone(), "", "");
    for child in node.children().filter(|n| n.is_element()) {
        match child.tag_name().name() {
            "titre" => title = Some(element_text(child)),
            "preparation" => body = Some(element_text(child)),
            "niveau" => {
                let s = element_text(child);
                recipe.difficulty = Some(Difficulty::from_xml_label(&s).ok_or_else(|| {
                    Error::Schema(format!("recipe {id}: unknown niveau {s:?}"))
                })?);
            }
            "type" => {
                let s = element_text(child);
                recipe.dish_type = Some(DishType::from_xml_label(&s).ok_or_else(|| {
                    Error::Schema(format!("recipe {id}: unknown type {s:?}"))
                })?);
            }
            "ingredients" => {
                let mut items = Vec::new();
                for ing in child.children().filter(|n| n.is_element()) {
                    if ing.tag_name().name() != "ingredient" {
                        return Err(Error::Schema(format!(
                            "recipe {id}: unexpected <{}> in <ingredients>",
                            ing.tag_name().name()
                        )));
                    }
                    let s = element_text(ing);
                    if s.is_empty() {
                        return Err(Error::Schema(format!("recipe {id}: empty <ingredient>")));
                    }
                    items.push(s);
                }
                recipe.gold_ingredients = Some(items);
            }
            _ => {}
        }
    }
    recipe.title =
        title.ok_or_else(|| Error::Schema(format!("recipe {id}: missing <titre>")))?;
    recipe.body =
        body.ok_or_else(|| Error::Schema(format!("recipe {id}: missing <preparation>")))?;
    Ok(recipe)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub dev_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(dev_fraction: f64, seed: u64) -> Result<Self> {
        if !(dev_fraction > 0.0 && dev_fraction < 1.0) {
            return Err(Error::Split(format!(
                "dev_fraction {dev_fraction} must lie strictly between 0 and 1"
            )));
        }
        Ok(SplitSpec { dev_fraction, seed })
    }
}

/// Per-class dev size: `round(fraction * n)` clamped to `[1, n - 1]`.
pub fn dev_quota(class_size: usize, dev_fraction: f64) -> usize {
    let raw = (dev_fraction * class_size as f64).round() as usize;
    raw.clamp(1, class_size.saturating_sub(1).max(1))
}

/// Stratified train/dev partition. Classes are visited in sorted order and
/// each is shuffled with its own derived stream, so per-class sizes never
/// depend on the seed. Both halves keep the original document order.
pub fn stratified_split(corpus: &Corpus, spec: SplitSpec) -> Result<(Corpus, Corpus)> {
    if corpus.label_kind() == LabelKind::None {
        return Err(Error::Split("corpus carries no labels to stratify on".into()));
    }
    SplitSpec::new(spec.dev_fraction, spec.seed)?;
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, r) in corpus.recipes().iter().enumerate() {
        let label = corpus.label_of(r).expect("labeled corpus");
        by_class.entry(label).or_default().push(i);
    }
    let mut in_dev = vec![false; corpus.len()];
    for (stream, (label, members)) in by_class.iter().enumerate() {
        if members.len() < 2 {
            return Err(Error::Split(format!(
                "class {label} has {} member(s), need at least 2",
                members.len()
            )));
        }
        let quota = dev_quota(members.len(), spec.dev_fraction);
        if quota == 0 || quota >= members.len() {
            return Err(Error::Split(format!("class {label} would leave one side empty")));
        }
        let mut shuffled = members.clone();
        rng::shuffle(&mut shuffled, &mut rng::derived(spec.seed, stream as u64));
        for &i in &shuffled[..quota] {
            in_dev[i] = true;
        }
    }
    let (dev, train): (Vec<usize>, Vec<usize>) = (0..corpus.len()).partition(|&i| in_dev[i]);
    Ok((corpus.subset(&train)?, corpus.subset(&dev)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE: &str = r#"<recettes><recette id="1"><titre>Quiche</titre>
        <preparation>Battre les oeufs.</preparation><niveau>Facile</niveau></recette></recettes>"#;

    fn labeled(counts: &[(DishType, usize)]) -> Corpus {
        let mut recipes = Vec::new();
        for &(dish, n) in counts {
            for _ in 0..n {
                let mut r = Recipe::new(recipes.len().to_string(), "t", "b");
                r.dish_type = Some(dish);
                recipes.push(r);
            }
        }
        Corpus::new(recipes, LabelKind::DishType).unwrap()
    }

    #[test]
    fn parses_single_recipe() {
        let c = parse_corpus(ONE, LabelKind::Difficulty).unwrap();
        assert_eq!(c.len(), 1);
        let r = &c.recipes()[0];
        assert_eq!(r.title, "Quiche");
        assert_eq!(r.body, "Battre les oeufs.");
        assert_eq!(r.difficulty, Some(Difficulty::Facile));
    }

    #[test]
    fn duplicate_ids_are_schema_errors() {
        let xml = r#"<recettes><recette id="7"><titre>a</titre><preparation>b</preparation></recette>
            <recette id="7"><titre>c</titre><preparation>d</preparation></recette></recettes>"#;
        assert!(matches!(parse_corpus(xml, LabelKind::None), Err(Error::Schema(_))));
    }

    #[test]
    fn load_errors() {
        assert!(matches!(parse_corpus("<recettes>", LabelKind::None), Err(Error::Xml(_))));
        assert!(matches!(parse_corpus("<recettes/>", LabelKind::None), Err(Error::EmptyCorpus)));
        let empty_body = r#"<recettes><recette id="1"><titre>a</titre><preparation>  </preparation></recette></recettes>"#;
        assert!(matches!(parse_corpus(empty_body, LabelKind::None), Err(Error::Schema(_))));
        let bad_label = ONE.replace("Facile", "Easy");
        assert!(matches!(parse_corpus(&bad_label, LabelKind::None), Err(Error::Schema(_))));
        assert!(matches!(parse_corpus(ONE, LabelKind::DishType), Err(Error::Schema(_))));
    }

    #[test]
    fn difficulty_ranks_follow_declaration_order() {
        let ranks: Vec<u8> = Difficulty::ALL.iter().map(|d| d.rank()).collect();
        assert_eq!(ranks, vec![0, 1, 2, 3]);
    }

    #[test]
    fn split_counts_follow_rounding_rule() {
        let corpus = labeled(&[(DishType::Dessert, 60), (DishType::Entree, 40)]);
        let (train, dev) = stratified_split(&corpus, SplitSpec::new(0.25, 1).unwrap()).unwrap();
        assert_eq!(dev.class_counts()["dessert"], 15);
        assert_eq!(dev.class_counts()["entree"], 10);
        assert_eq!(train.len() + dev.len(), 100);
    }

    #[test]
    fn split_clamps_small_classes() {
        let corpus = labeled(&[(DishType::Dessert, 2), (DishType::Entree, 30)]);
        let (train, dev) = stratified_split(&corpus, SplitSpec::new(0.9, 3).unwrap()).unwrap();
        assert_eq!(dev.class_counts()["dessert"], 1);
        assert_eq!(train.class_counts()["dessert"], 1);
        assert_eq!(train.class_counts()["entree"], 3);
    }

    #[test]
    fn split_rejects_singleton_class_and_bad_fraction() {
        let corpus = labeled(&[(DishType::Dessert, 1), (DishType::Entree, 5)]);
        assert!(stratified_split(&corpus, SplitSpec { dev_fraction: 0.5, seed: 0 }).is_err());
        assert!(SplitSpec::new(0.0, 0).is_err());
        assert!(SplitSpec::new(1.0, 0).is_err());
    }

    #[test]
    fn deft_scale_dev_size() {
        // 13 684 recipes over the four difficulty levels, dev fraction 3863/13684.
        let sizes = [3000usize, 5200, 4100, 1384];
        let total: usize = sizes.iter().sum();
        assert_eq!(total, 13_684);
        let dev: usize = sizes.iter().map(|&n| dev_quota(n, 3863.0 / 13684.0)).sum();
        assert!((dev as i64 - 3863).abs() <= 4, "dev size {dev}");
    }
}
