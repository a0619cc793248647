//! The six commands. Every artifact lives under the configured output
//! directory:
//!
//! ```text
//! manifest.tsv            task, seed, split sizes, sha256 of every model
//! models/                 boost.txt svm.txt cosine.txt stats.tsv
//!                         agglutination.txt lexicon.tsv
//! scores/<method>.tsv     per-method score vectors
//! runs/<name>.tsv         final labels, or ranked ingredients for T4
//! reports/<run>.{txt,tsv} evaluation reports
//! sweep/                  parameter grids on the dev split
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use cuisto::boost::{boost_features, train_boost, BOOST_METHOD};
use cuisto::corpus::{load_corpus, stratified_split};
use cuisto::cosine::{
    parse_boosts, score_cosine, train_cosine, train_hierarchical, TermBoost, COSINE_METHOD,
    HIERARCHICAL_METHOD,
};
use cuisto::eval::{classification_report, mean_average_precision, parse_run};
use cuisto::extraction::{build_lexicon, extract, write_run};
use cuisto::features::{build_stats, gini_vocabulary, mutual_information_select};
use cuisto::fusion::{fuse_electre, fuse_linear, normalize_scores};
use cuisto::svm::{score_ovo, train_ovo, SVM_METHOD};
use cuisto::textnorm::Agglutinator;
use cuisto::{
    BoostConfig, BoostFeatures, BoostModel, Corpus, CosineModel, ElectreParams, Feed,
    HierarchicalModel, HierarchySpec, IngredientLexicon, ItemMatcher, LabelKind, LexiconStats,
    Normalizer, OvoModel, Qrels, Recipe, ScoreVector, SplitSpec,
};
use sha2::{Digest, Sha256};

use crate::config::{read, PipelineConfig, Task};
use crate::error::CliError;

pub const BOOST_FILE: &str = "models/boost.txt";
pub const SVM_FILE: &str = "models/svm.txt";
pub const COSINE_FILE: &str = "models/cosine.txt";
pub const STATS_FILE: &str = "models/stats.tsv";
pub const AGGLUTINATION_FILE: &str = "models/agglutination.txt";
pub const LEXICON_FILE: &str = "models/lexicon.tsv";
pub const MANIFEST_FILE: &str = "manifest.tsv";
pub const EXTRACTION_RUN: &str = "extraction";

/// Every classifier, in score-file order.
pub const METHODS: [&str; 4] = [BOOST_METHOD, SVM_METHOD, COSINE_METHOD, HIERARCHICAL_METHOD];

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::config(format!("io: cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, contents)
        .map_err(|e| CliError::config(format!("io: cannot write {}: {e}", path.display())))
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn scores_path(root: &Path, method: &str) -> PathBuf {
    root.join("scores").join(format!("{method}.tsv"))
}

pub fn run_path(root: &Path, name: &str) -> PathBuf {
    root.join("runs").join(format!("{name}.tsv"))
}

fn load(path: &Path, kind: LabelKind, role: &str) -> Result<Corpus, CliError> {
    load_corpus(path, kind)
        .map_err(|e| CliError::from(e).context(format!("{role} corpus {}", path.display())))
}

fn test_corpus(config: &PipelineConfig, kind: LabelKind) -> Result<Corpus, CliError> {
    load(&config.require("test", &config.paths.test)?, kind, "test")
}

/// Training plus test texts; labels are dropped, only df/idf read this.
fn full_collection(train: &Corpus, config: &PipelineConfig) -> Result<Corpus, CliError> {
    let mut recipes = train.recipes().to_vec();
    if let Some(path) = &config.paths.test {
        let test = load(path, LabelKind::None, "test")?;
        recipes.extend(test.recipes().iter().cloned());
    }
    Corpus::new(recipes, LabelKind::None)
        .map_err(|e| CliError::from(e).context("train and test ids must be disjoint"))
}

/// Ingredient list seen by boosting: the extractor's output, so training and
/// test recipes are described the same way whether or not they carry gold.
/// Without a lexicon the ingredient features stay empty.
fn ingredients(recipe: &Recipe, lexicon: Option<&IngredientLexicon>, normalizer: &Normalizer) -> Vec<String> {
    match lexicon {
        Some(lex) => extract(recipe, lex, normalizer).ingredients().into_iter().map(str::to_owned).collect(),
        None => Vec::new(),
    }
}

fn boost_examples<'a>(
    corpus: &'a Corpus,
    lexicon: Option<&IngredientLexicon>,
    normalizer: &Normalizer,
    config: &PipelineConfig,
) -> Vec<(BoostFeatures, &'a str)> {
    corpus
        .recipes()
        .iter()
        .map(|r| {
            let f = boost_features(r, &ingredients(r, lexicon, normalizer), normalizer, config.feature_schema());
            (f, corpus.label_of(r).expect("labeled corpus"))
        })
        .collect()
}

fn hierarchy_spec(config: &PipelineConfig) -> Result<HierarchySpec, CliError> {
    Ok(match (&config.paths.hierarchy, config.task) {
        (Some(path), _) => HierarchySpec::load(path)?,
        (None, Task::T2) => HierarchySpec::dish_type_default(config.cosine.alpha),
        (None, _) => HierarchySpec::difficulty_default(config.cosine.alpha),
    })
}

fn term_boosts(config: &PipelineConfig) -> Result<Vec<TermBoost>, CliError> {
    match &config.paths.boosts {
        Some(path) => Ok(parse_boosts(&read(path)?)?),
        None => Ok(Vec::new()),
    }
}

fn require_classification(config: &PipelineConfig, command: &str) -> Result<(), CliError> {
    if config.task.is_classification() {
        Ok(())
    } else {
        Err(CliError::config(format!("{command}: task {} has no classifiers", config.task.name())))
    }
}

/// Every trained classifier plus the statistics they were trained with.
#[derive(Debug, Clone)]
pub struct Models {
    pub stats: LexiconStats,
    pub boost: BoostModel,
    pub svm: OvoModel,
    pub cosine: CosineModel,
    pub hierarchical: HierarchicalModel,
    /// Feeds the boosting ingredient features when one was trained.
    pub lexicon: Option<IngredientLexicon>,
}

/// Scores of one method for a list of recipes, with the method's own decision.
#[derive(Debug, Clone)]
pub struct MethodScores {
    pub method: String,
    pub classes: Vec<String>,
    pub rows: Vec<(ScoreVector, String)>,
}

impl Models {
    /// Trains the vector-space models on `train`; boosting is trained by the caller.
    pub fn train(
        train: &Corpus,
        full: &Corpus,
        normalizer: &Normalizer,
        config: &PipelineConfig,
        boost: BoostModel,
        lexicon: Option<IngredientLexicon>,
    ) -> Result<Self, CliError> {
        let ctx = |m: &'static str| move |e: cuisto::Error| CliError::from(e).context(m);
        let stats = build_stats(train, full, normalizer, Feed::TitleAndBody).map_err(ctx("stats"))?;
        let filter: Option<BTreeSet<String>> = config
            .mi_k()
            .map(|k| mutual_information_select(&stats, k).into_iter().collect());
        let svm = train_ovo(train, &stats, normalizer, &config.svm_config(), filter.as_ref())
            .map_err(ctx("svm"))?;
        let threshold = config.cosine.gini_threshold;
        let mode = config.denominator_mode()?;
        let cosine =
            train_cosine(&stats, threshold, mode, &term_boosts(config)?).map_err(ctx("cosine"))?;
        let spec = hierarchy_spec(config)?;
        let hierarchical = train_hierarchical(train, full, normalizer, &spec, threshold, mode)
            .map_err(ctx("hierarchical"))?;
        Ok(Models {
            stats,
            boost,
            svm,
            cosine,
            hierarchical,
            lexicon,
        })
    }

    pub fn check_consistent(&self, config: &PipelineConfig) -> Result<(), CliError> {
        let classes = self.stats.classes();
        let leaves: BTreeSet<&str> = self.hierarchical.spec.leaves().into_iter().collect();
        let sets = [
            (BOOST_METHOD, self.boost.classes()),
            (SVM_METHOD, self.svm.classes()),
            (COSINE_METHOD, self.cosine.classes()),
        ];
        for (name, c) in sets {
            if c != classes {
                return Err(CliError::mismatch(format!(
                    "model: {name} classes {c:?} differ from stats classes {classes:?}"
                )));
            }
        }
        if leaves != classes.iter().map(String::as_str).collect() {
            return Err(CliError::mismatch(format!(
                "model: hierarchy leaves {leaves:?} differ from stats classes {classes:?}"
            )));
        }
        let expected = config.task.label_kind().class_ids();
        if !classes.iter().all(|c| expected.contains(&c.as_str())) {
            return Err(CliError::mismatch(format!(
                "model: classes {classes:?} do not belong to task {}",
                config.task.name()
            )));
        }
        if self.boost.schema() != config.feature_schema() {
            return Err(CliError::mismatch(format!(
                "model: boost feature schema {:?} differs from the configured {:?}",
                self.boost.schema(),
                config.feature_schema()
            )));
        }
        Ok(())
    }

    pub fn score(
        &self,
        recipes: &[Recipe],
        normalizer: &Normalizer,
        config: &PipelineConfig,
    ) -> Result<Vec<MethodScores>, CliError> {
        let classes = self.stats.classes().to_vec();
        let mut out: Vec<MethodScores> = METHODS
            .iter()
            .map(|m| MethodScores {
                method: (*m).to_owned(),
                classes: classes.clone(),
                rows: Vec::with_capacity(recipes.len()),
            })
            .collect();
        for r in recipes {
            let ingr = ingredients(r, self.lexicon.as_ref(), normalizer);
            let f = boost_features(r, &ingr, normalizer, config.feature_schema());
            let boost = self
                .boost
                .score(&r.id, &f)
                .map_err(|e| CliError::from(e).context(format!("boost, recipe {}", r.id)))?;
            let boost_label = self.boost.predict(&f)?.to_owned();
            let svm = score_ovo(&self.svm, r, &self.stats, normalizer);
            let cosine = score_cosine(&self.cosine, r, normalizer);
            let hier = self.hierarchical.classify_recipe(r, normalizer);
            let argmax = |v: &ScoreVector| v.argmax().expect("non-empty class set").to_owned();
            let rows = [
                (boost, boost_label),
                (svm.clone(), argmax(&svm)),
                (cosine.clone(), argmax(&cosine)),
                (hier.scores, hier.leaf),
            ];
            for (dst, row) in out.iter_mut().zip(rows) {
                dst.rows.push(row);
            }
        }
        Ok(out)
    }
}

/// Boosting with the round count picked on a dev split of `train`, then
/// retrained on the whole of `train` for that many rounds.
fn train_boost_selected(
    train: &Corpus,
    lexicon: Option<&IngredientLexicon>,
    normalizer: &Normalizer,
    config: &PipelineConfig,
) -> Result<(BoostModel, SplitSizes), CliError> {
    let ctx = |e: cuisto::Error| CliError::from(e).context("boost");
    let (fit, dev) = stratified_split(train, SplitSpec::new(config.split.dev_fraction, config.seed)?)
        .map_err(|e| CliError::from(e).context("split"))?;
    let (_, trace) = train_boost(
        &boost_examples(&fit, lexicon, normalizer, config),
        &boost_examples(&dev, lexicon, normalizer, config),
        &config.boost_config(),
    )
    .map_err(ctx)?;
    let retrain = BoostConfig {
        max_rounds: trace.chosen_rounds.max(1),
        ..config.boost_config()
    };
    let (model, _) = train_boost(&boost_examples(train, lexicon, normalizer, config), &[], &retrain).map_err(ctx)?;
    let dev_accuracy = trace.dev_micro_f.get(trace.chosen_rounds.saturating_sub(1)).copied();
    Ok((
        model,
        SplitSizes {
            fit: fit.len(),
            dev: dev.len(),
            boost_rounds: trace.chosen_rounds,
            boost_dev_accuracy: dev_accuracy,
        },
    ))
}

struct SplitSizes {
    fit: usize,
    dev: usize,
    boost_rounds: usize,
    boost_dev_accuracy: Option<f64>,
}

/// Line-oriented record of a training run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    pub entries: Vec<(String, String)>,
    /// `(kind, name, relative path, sha256)`; kind is `model` or `artifact`.
    pub files: Vec<(String, String, String, String)>,
}

impl Manifest {
    fn entry(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_owned(), value.to_string()));
    }

    fn file(&mut self, root: &Path, kind: &str, name: &str, rel: &str, contents: &str) -> Result<(), CliError> {
        write_file(&root.join(rel), contents)?;
        self.files.push((
            kind.to_owned(),
            name.to_owned(),
            rel.to_owned(),
            sha256_hex(contents.as_bytes()),
        ));
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn models(&self) -> impl Iterator<Item = &str> {
        self.files.iter().filter(|f| f.0 == "model").map(|f| f.1.as_str())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("manifest\tv1\n");
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k}\t{v}");
        }
        for (kind, name, rel, digest) in &self.files {
            let _ = writeln!(out, "{kind}\t{name}\t{rel}\t{digest}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut lines = text.lines();
        if lines.next() != Some("manifest\tv1") {
            return Err(CliError::mismatch("manifest: not a v1 manifest"));
        }
        let mut m = Manifest::default();
        for (i, line) in lines.enumerate() {
            let cols: Vec<&str> = line.split('\t').collect();
            match cols[..] {
                [kind @ ("model" | "artifact"), name, rel, digest] => {
                    m.files.push((kind.into(), name.into(), rel.into(), digest.into()))
                }
                [k, v] => m.entries.push((k.into(), v.into())),
                _ => return Err(CliError::data(format!("manifest: malformed line {}", i + 2))),
            }
        }
        Ok(m)
    }

    /// Reads the manifest under `root` and checks task and file digests.
    pub fn verify(root: &Path, task: Task) -> Result<Self, CliError> {
        let path = root.join(MANIFEST_FILE);
        if !path.is_file() {
            return Err(CliError::config(format!(
                "manifest: {} not found; run `cuisto train` first",
                path.display()
            )));
        }
        let m = Self::parse(&read(&path)?)?;
        if m.get("task") != Some(task.name()) {
            return Err(CliError::mismatch(format!(
                "manifest: trained for task {:?}, configured for {}",
                m.get("task").unwrap_or("?"),
                task.name()
            )));
        }
        for (_, _, rel, digest) in &m.files {
            let bytes = fs::read(root.join(rel)).map_err(|e| {
                CliError::config(format!("io: cannot read {}: {e}", root.join(rel).display()))
            })?;
            if sha256_hex(&bytes) != *digest {
                return Err(CliError::mismatch(format!(
                    "manifest: {rel} changed since training (digest differs)"
                )));
            }
        }
        Ok(m)
    }
}

fn cosine_bundle(flat: &CosineModel, hier: &HierarchicalModel) -> String {
    let mut out = String::from("cosine-bundle\tv1\n");
    for (tag, text) in [("flat", flat.to_text()), ("hierarchical", hier.to_text())] {
        for line in text.lines() {
            let _ = writeln!(out, "{tag}\t{line}");
        }
    }
    out
}

fn parse_cosine_bundle(text: &str) -> Result<(CosineModel, HierarchicalModel), CliError> {
    let mut lines = text.lines();
    if lines.next() != Some("cosine-bundle\tv1") {
        return Err(CliError::mismatch("model: not a v1 cosine bundle"));
    }
    let (mut flat, mut hier) = (String::new(), String::new());
    for line in lines {
        let (dst, rest) = match line.split_once('\t') {
            Some(("flat", rest)) => (&mut flat, rest),
            Some(("hierarchical", rest)) => (&mut hier, rest),
            _ => return Err(CliError::data("cosine bundle: unexpected line")),
        };
        dst.push_str(rest);
        dst.push('\n');
    }
    Ok((CosineModel::from_text(&flat)?, HierarchicalModel::from_text(&hier)?))
}

fn normalizer_for_training(config: &PipelineConfig, train: &Corpus) -> Result<(Normalizer, Agglutinator), CliError> {
    let base = Normalizer::new(config.norm_config()?)?;
    let model = if config.norm.agglutinate {
        base.fit_agglutinator(train)?
    } else {
        Agglutinator::from_ngrams(Vec::<Vec<String>>::new())
    };
    Ok((base.with_agglutinator(model.clone()), model))
}

fn trained_normalizer(config: &PipelineConfig, root: &Path) -> Result<Normalizer, CliError> {
    let model = Agglutinator::from_text(&read(&root.join(AGGLUTINATION_FILE))?)?;
    Ok(Normalizer::new(config.norm_config()?)?.with_agglutinator(model))
}

/// Writes every model, the statistics, the agglutination model, the
/// ingredient lexicon and the manifest.
pub fn cmd_train(config: &PipelineConfig) -> Result<Manifest, CliError> {
    let root = config.output_dir();
    let train_path = config.require("train", &config.paths.train)?;
    let train = load(&train_path, config.task.label_kind(), "train")?;
    let (normalizer, agglutinator) = normalizer_for_training(config, &train)?;

    let mut m = Manifest::default();
    m.entry("task", config.task.name());
    m.entry("seed", config.seed);
    m.entry("train", train.len());

    let has_gold = train.recipes().iter().any(|r| r.gold_ingredients.is_some());
    let lexicon = if has_gold {
        Some(build_lexicon(&train, &normalizer).map_err(|e| CliError::from(e).context("lexicon"))?)
    } else if config.task == Task::T4 {
        return Err(CliError::data("lexicon: T4 training needs gold ingredient lists"));
    } else {
        None
    };

    if config.task.is_classification() {
        let full = full_collection(&train, config)?;
        let (boost, sizes) = train_boost_selected(&train, lexicon.as_ref(), &normalizer, config)?;
        m.entry("fit", sizes.fit);
        m.entry("dev", sizes.dev);
        m.entry("collection", full.len());
        m.entry("classes", train.classes().join(","));
        m.entry("boost_rounds", sizes.boost_rounds);
        if let Some(acc) = sizes.boost_dev_accuracy {
            m.entry("boost_dev_accuracy", format!("{acc:.6}"));
        }
        let models = Models::train(&train, &full, &normalizer, config, boost, lexicon.clone())?;
        m.file(root, "model", BOOST_METHOD, BOOST_FILE, &models.boost.to_text())?;
        m.file(root, "model", SVM_METHOD, SVM_FILE, &models.svm.to_text())?;
        m.file(
            root,
            "model",
            COSINE_METHOD,
            COSINE_FILE,
            &cosine_bundle(&models.cosine, &models.hierarchical),
        )?;
        m.file(root, "artifact", "stats", STATS_FILE, &models.stats.to_tsv())?;
    }
    m.file(root, "artifact", "agglutination", AGGLUTINATION_FILE, &agglutinator.to_text())?;
    if let Some(lex) = &lexicon {
        m.file(root, "artifact", "lexicon", LEXICON_FILE, &lex.to_tsv())?;
    }
    write_file(&root.join(MANIFEST_FILE), &m.to_text())?;
    Ok(m)
}

pub fn load_models(config: &PipelineConfig, root: &Path) -> Result<Models, CliError> {
    let manifest = Manifest::verify(root, config.task)?;
    let get = |rel: &str| read(&root.join(rel));
    let ctx = |rel: &'static str| move |e: cuisto::Error| CliError::from(e).context(rel);
    let (cosine, hierarchical) = parse_cosine_bundle(&get(COSINE_FILE)?)?;
    let models = Models {
        stats: LexiconStats::from_tsv(&get(STATS_FILE)?).map_err(ctx(STATS_FILE))?,
        boost: BoostModel::from_text(&get(BOOST_FILE)?).map_err(ctx(BOOST_FILE))?,
        svm: OvoModel::from_text(&get(SVM_FILE)?).map_err(ctx(SVM_FILE))?,
        cosine,
        hierarchical,
        lexicon: match manifest.files.iter().any(|f| f.2 == LEXICON_FILE) {
            true => Some(IngredientLexicon::from_tsv(&get(LEXICON_FILE)?).map_err(ctx(LEXICON_FILE))?),
            false => None,
        },
    };
    models.check_consistent(config)?;
    Ok(models)
}

pub fn format_scores(scores: &MethodScores) -> String {
    let mut out = String::from("recipe_id");
    for c in &scores.classes {
        let _ = write!(out, "\t{c}");
    }
    out.push_str("\tpredicted\n");
    for (v, label) in &scores.rows {
        out.push_str(&v.recipe_id);
        for c in &scores.classes {
            let _ = write!(out, "\t{:.16e}", v.scores[c]);
        }
        let _ = writeln!(out, "\t{label}");
    }
    out
}

pub fn parse_scores(text: &str, method: &str) -> Result<MethodScores, CliError> {
    let bad = |line: usize, msg: &str| CliError::data(format!("scores {method}: line {line}: {msg}"));
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or_else(|| bad(1, "empty file"))?.split('\t').collect();
    if header.len() < 3 || header[0] != "recipe_id" || header[header.len() - 1] != "predicted" {
        return Err(bad(1, "expected recipe_id, classes, predicted"));
    }
    let classes: Vec<String> = header[1..header.len() - 1].iter().map(|s| s.to_string()).collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != header.len() {
            return Err(bad(i + 2, "wrong column count"));
        }
        let mut scores = BTreeMap::new();
        for (c, s) in classes.iter().zip(&cols[1..cols.len() - 1]) {
            let x: f64 = s.parse().map_err(|_| bad(i + 2, "bad score"))?;
            if !x.is_finite() {
                return Err(bad(i + 2, "non-finite score"));
            }
            scores.insert(c.clone(), x);
        }
        rows.push((ScoreVector::new(cols[0], method, scores), cols[cols.len() - 1].to_owned()));
    }
    Ok(MethodScores {
        method: method.to_owned(),
        classes,
        rows,
    })
}

/// Scores the test corpus with every method; returns the written files.
pub fn cmd_classify(config: &PipelineConfig) -> Result<Vec<PathBuf>, CliError> {
    require_classification(config, "classify")?;
    let root = config.output_dir();
    let models = load_models(config, root)?;
    let normalizer = trained_normalizer(config, root)?;
    let test = test_corpus(config, LabelKind::None)?;
    let mut written = Vec::new();
    for scores in models.score(test.recipes(), &normalizer, config)? {
        let path = scores_path(root, &scores.method);
        write_file(&path, &format_scores(&scores))?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FuseMode {
    Linear,
    Electre,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunKind {
    /// One method's own decision.
    Single(String),
    Fused(FuseMode, Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub name: String,
    pub kind: RunKind,
}

/// Run definitions of the original submissions: one single-method run, then
/// ELECTRE and linear fusion over the same method set.
pub fn paper_runs(task: Task) -> Vec<RunSpec> {
    let (single, set): (&str, &[&str]) = match task {
        Task::T2 => (HIERARCHICAL_METHOD, &METHODS),
        _ => (SVM_METHOD, &[BOOST_METHOD, SVM_METHOD, HIERARCHICAL_METHOD]),
    };
    let set: Vec<String> = set.iter().map(|s| s.to_string()).collect();
    vec![
        RunSpec {
            name: "run1".into(),
            kind: RunKind::Single(single.into()),
        },
        RunSpec {
            name: "run2".into(),
            kind: RunKind::Fused(FuseMode::Electre, set.clone()),
        },
        RunSpec {
            name: "run3".into(),
            kind: RunKind::Fused(FuseMode::Linear, set),
        },
    ]
}

/// Per-recipe decisions; `fallbacks` counts ELECTRE non-singleton kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedRun {
    pub labels: Vec<(String, String)>,
    pub fallbacks: usize,
}

/// Fuses per-method scores. Vectors are normalized here; the fusion
/// operators expect normalized input.
pub fn fuse_scores(
    scores: &BTreeMap<String, MethodScores>,
    kind: &RunKind,
    params: &ElectreParams,
) -> Result<FusedRun, CliError> {
    let missing = |m: &str| CliError::config(format!("fuse: no scores for method {m:?}"));
    match kind {
        RunKind::Single(m) => {
            let s = scores.get(m).ok_or_else(|| missing(m))?;
            Ok(FusedRun {
                labels: s.rows.iter().map(|(v, l)| (v.recipe_id.clone(), l.clone())).collect(),
                fallbacks: 0,
            })
        }
        RunKind::Fused(mode, methods) => {
            let sets: Vec<&MethodScores> = methods
                .iter()
                .map(|m| scores.get(m).ok_or_else(|| missing(m)))
                .collect::<Result<_, _>>()?;
            let first = sets.first().ok_or_else(|| CliError::config("fuse: empty method set"))?;
            let index: Vec<BTreeMap<&str, &ScoreVector>> = sets
                .iter()
                .map(|s| s.rows.iter().map(|(v, _)| (v.recipe_id.as_str(), v)).collect())
                .collect();
            let mut out = FusedRun {
                labels: Vec::with_capacity(first.rows.len()),
                fallbacks: 0,
            };
            for (v, _) in &first.rows {
                let id = v.recipe_id.as_str();
                let vectors: Vec<ScoreVector> = index
                    .iter()
                    .zip(methods)
                    .map(|(ix, m)| {
                        ix.get(id).map(|v| normalize_scores(v)).ok_or_else(|| {
                            CliError::data(format!("fuse: recipe {id} missing from {m} scores"))
                        })
                    })
                    .collect::<Result<_, _>>()?;
                let ctx = |e: cuisto::Error| CliError::from(e).context(format!("fuse, recipe {id}"));
                let label = match mode {
                    FuseMode::Linear => fuse_linear(&vectors).map_err(ctx)?.0,
                    FuseMode::Electre => {
                        let d = fuse_electre(&vectors, params).map_err(ctx)?;
                        out.fallbacks += usize::from(d.fell_back);
                        d.class
                    }
                };
                out.labels.push((id.to_owned(), label));
            }
            Ok(out)
        }
    }
}

pub fn format_labels(labels: &[(String, String)]) -> String {
    labels.iter().map(|(id, l)| format!("{id}\t{l}\n")).collect()
}

pub fn parse_labels(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (id, label) = line
            .split_once('\t')
            .ok_or_else(|| CliError::data(format!("run: line {}: expected id<TAB>class", i + 1)))?;
        if out.insert(id.to_owned(), label.trim().to_owned()).is_some() {
            return Err(CliError::data(format!("run: recipe {id} labeled twice")));
        }
    }
    Ok(out)
}

fn read_method_scores(root: &Path, methods: &BTreeSet<&str>) -> Result<BTreeMap<String, MethodScores>, CliError> {
    let mut out = BTreeMap::new();
    for &m in methods {
        let path = scores_path(root, m);
        if !path.is_file() {
            return Err(CliError::config(format!(
                "fuse: {} not found; run `cuisto classify` first",
                path.display()
            )));
        }
        out.insert(m.to_owned(), parse_scores(&read(&path)?, m)?);
    }
    Ok(out)
}

/// Writes one run file per spec; returns `(path, electre fallbacks)`.
pub fn cmd_fuse(config: &PipelineConfig, runs: &[RunSpec]) -> Result<Vec<(PathBuf, usize)>, CliError> {
    require_classification(config, "fuse")?;
    let root = config.output_dir();
    let needed: BTreeSet<&str> = runs
        .iter()
        .flat_map(|r| match &r.kind {
            RunKind::Single(m) => vec![m.as_str()],
            RunKind::Fused(_, ms) => ms.iter().map(String::as_str).collect(),
        })
        .collect();
    if let Some(m) = needed.iter().find(|m| !METHODS.contains(m)) {
        return Err(CliError::config(format!("fuse: unknown method {m:?} (known {METHODS:?})")));
    }
    let scores = read_method_scores(root, &needed)?;
    let params = config.electre_params();
    let mut written = Vec::new();
    for run in runs {
        let fused = fuse_scores(&scores, &run.kind, &params)?;
        let path = run_path(root, &run.name);
        write_file(&path, &format_labels(&fused.labels))?;
        written.push((path, fused.fallbacks));
    }
    Ok(written)
}

/// Ranked ingredient run for the test corpus.
pub fn cmd_extract(config: &PipelineConfig) -> Result<PathBuf, CliError> {
    let root = config.output_dir();
    let manifest = Manifest::verify(root, config.task)?;
    if !manifest.files.iter().any(|f| f.2 == LEXICON_FILE) {
        return Err(CliError::config(
            "extract: no ingredient lexicon was trained (training corpus had no gold lists)",
        ));
    }
    let lexicon = IngredientLexicon::from_tsv(&read(&root.join(LEXICON_FILE))?)?;
    let normalizer = trained_normalizer(config, root)?;
    let test = test_corpus(config, LabelKind::None)?;
    let lists: Vec<_> = test.recipes().iter().map(|r| extract(r, &lexicon, &normalizer)).collect();
    let run = write_run(test.recipes().iter().map(|r| r.id.as_str()).zip(&lists));
    let path = run_path(root, EXTRACTION_RUN);
    write_file(&path, &run)?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub text: String,
    pub tsv: String,
}

/// Scores a run against the test gold: F-scores for T1/T2, MAP for T4.
pub fn evaluate_run(config: &PipelineConfig, run_text: &str) -> Result<Report, CliError> {
    let ctx = |e: cuisto::Error| CliError::from(e).context("evaluate");
    if config.task == Task::T4 {
        let qrels = match &config.paths.qrels {
            Some(p) => Qrels::parse(&read(p)?).map_err(ctx)?,
            None => Qrels::from_corpus(&test_corpus(config, LabelKind::None)?),
        };
        let matcher = ItemMatcher::new(Normalizer::new(config.norm_config()?)?);
        let report = mean_average_precision(&parse_run(run_text).map_err(ctx)?, &qrels, &matcher).map_err(ctx)?;
        return Ok(Report {
            text: report.to_text(),
            tsv: report.to_tsv(),
        });
    }
    let gold = test_corpus(config, config.task.label_kind())?;
    let predicted = parse_labels(run_text)?;
    let report = classification_report(&gold, &predicted, config.task == Task::T1).map_err(ctx)?;
    Ok(Report {
        text: report.to_text(),
        tsv: report.to_tsv(),
    })
}

/// Evaluates the run file and writes `reports/<run>.txt` and `.tsv`. A bare
/// name that is not a file is looked up as `runs/<name>.tsv`.
pub fn cmd_evaluate(config: &PipelineConfig, run: &Path) -> Result<Report, CliError> {
    let named;
    let run = match run.to_str() {
        Some(name) if !run.exists() && !name.contains(['/', '.']) => {
            named = run_path(&config.output_dir(), name);
            named.as_path()
        }
        _ => run,
    };
    let report = evaluate_run(config, &read(run)?)
        .map_err(|e| e.context(format!("run {}", run.display())))?;
    let stem = run.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    let dir = config.output_dir().join("reports");
    write_file(&dir.join(format!("{stem}.txt")), &report.text)?;
    write_file(&dir.join(format!("{stem}.tsv")), &report.tsv)?;
    Ok(report)
}

/// Grid points: thresholds 0.00..=1.00 by 0.05, concordance 0.50..=1.00 by
/// 0.05, veto 0.1..=1.0 by 0.1.
pub fn gini_grid() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

pub fn electre_grid() -> Vec<(f64, f64)> {
    let sc = (10..=20).map(|i| i as f64 / 20.0);
    sc.flat_map(|s| (1..=10).map(move |v| (s, v as f64 / 10.0))).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub gini: String,
    pub electre: String,
}

/// Tunes the Gini threshold and the ELECTRE parameters on the dev split.
/// Every model is trained on the fit part only.
pub fn cmd_sweep(config: &PipelineConfig) -> Result<SweepResult, CliError> {
    require_classification(config, "sweep")?;
    let train_path = config.require("train", &config.paths.train)?;
    let train = load(&train_path, config.task.label_kind(), "train")?;
    let (fit, dev) = stratified_split(&train, SplitSpec::new(config.split.dev_fraction, config.seed)?)
        .map_err(|e| CliError::from(e).context("split"))?;
    let (normalizer, _) = normalizer_for_training(config, &fit)?;
    let full = full_collection(&train, config)?;
    let ordinal = config.task == Task::T1;
    let f_scores = |labels: &[(String, String)]| -> Result<(f64, f64), CliError> {
        let predicted = labels.iter().cloned().collect();
        let r = classification_report(&dev, &predicted, ordinal)?;
        Ok((r.micro_f, r.macro_f))
    };

    let stats = build_stats(&fit, &full, &normalizer, Feed::TitleAndBody)?;
    let boosts = term_boosts(config)?;
    let mode = config.denominator_mode()?;
    let mut gini = String::from("threshold\tvocabulary\tmicro_f\tmacro_f\n");
    for thr in gini_grid() {
        let model = train_cosine(&stats, thr, mode, &boosts)?;
        let labels: Vec<(String, String)> = dev
            .recipes()
            .iter()
            .map(|r| {
                let v = score_cosine(&model, r, &normalizer);
                (r.id.clone(), v.argmax().expect("classes").to_owned())
            })
            .collect();
        let (micro, macro_f) = f_scores(&labels)?;
        let vocab = gini_vocabulary(&stats, thr).len();
        let _ = writeln!(gini, "{thr:.2}\t{vocab}\t{micro:.6}\t{macro_f:.6}");
    }

    let lexicon = match fit.recipes().iter().any(|r| r.gold_ingredients.is_some()) {
        true => Some(build_lexicon(&fit, &normalizer).map_err(|e| CliError::from(e).context("lexicon"))?),
        false => None,
    };
    let (boost, _) = train_boost(
        &boost_examples(&fit, lexicon.as_ref(), &normalizer, config),
        &boost_examples(&dev, lexicon.as_ref(), &normalizer, config),
        &config.boost_config(),
    )
    .map_err(|e| CliError::from(e).context("boost"))?;
    let models = Models::train(&fit, &full, &normalizer, config, boost, lexicon)?;
    let scores: BTreeMap<String, MethodScores> = models
        .score(dev.recipes(), &normalizer, config)?
        .into_iter()
        .map(|s| (s.method.clone(), s))
        .collect();
    let set = match paper_runs(config.task).pop().expect("three runs").kind {
        RunKind::Fused(_, set) => set,
        RunKind::Single(_) => unreachable!("run3 is fused"),
    };
    let mut electre = String::from("mode\tconcordance\tveto\tmicro_f\tmacro_f\tfallbacks\n");
    let base = config.electre_params();
    let linear = fuse_scores(&scores, &RunKind::Fused(FuseMode::Linear, set.clone()), &base)?;
    let (micro, macro_f) = f_scores(&linear.labels)?;
    let _ = writeln!(electre, "linear\t-\t-\t{micro:.6}\t{macro_f:.6}\t0");
    for (sc, veto) in electre_grid() {
        let params = ElectreParams {
            concordance_threshold: sc,
            default_veto: veto,
            ..base.clone()
        };
        let run = fuse_scores(&scores, &RunKind::Fused(FuseMode::Electre, set.clone()), &params)?;
        let (micro, macro_f) = f_scores(&run.labels)?;
        let _ = writeln!(
            electre,
            "electre\t{sc:.2}\t{veto:.1}\t{micro:.6}\t{macro_f:.6}\t{}",
            run.fallbacks
        );
    }
    let dir = config.output_dir().join("sweep");
    write_file(&dir.join("gini.tsv"), &gini)?;
    write_file(&dir.join("electre.tsv"), &electre)?;
    Ok(SweepResult { gini, electre })
}
