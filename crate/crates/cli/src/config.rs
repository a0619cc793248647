//! Pipeline configuration: one TOML file, relative paths resolved against
//! the file's directory, command-line flags applied on top.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cuisto::textnorm::{french_number_words, load_abbreviations};
use cuisto::{BoostConfig, DenominatorMode, ElectreParams, LabelKind, NormConfig, SvmConfig};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[value(rename_all = "UPPER")]
pub enum Task {
    /// Difficulty level.
    T1,
    /// Dish type.
    T2,
    /// Ingredient extraction.
    T4,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::T1 => "T1",
            Task::T2 => "T2",
            Task::T4 => "T4",
        }
    }

    /// Label carried by the training corpus; T4 trains on ingredient lists only.
    pub fn label_kind(self) -> LabelKind {
        match self {
            Task::T1 => LabelKind::Difficulty,
            Task::T2 => LabelKind::DishType,
            Task::T4 => LabelKind::None,
        }
    }

    pub fn is_classification(self) -> bool {
        self != Task::T4
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Paths {
    pub train: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub abbreviations: Option<PathBuf>,
    pub hierarchy: Option<PathBuf>,
    /// TOML file holding a `[fusion]` table; overrides the inline block.
    pub fusion: Option<PathBuf>,
    pub boosts: Option<PathBuf>,
    pub qrels: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormBlock {
    pub number_conversion: bool,
    pub agglutinate: bool,
    pub agglutination_min_count: usize,
    pub agglutination_max_n: usize,
}

impl Default for NormBlock {
    fn default() -> Self {
        let d = NormConfig::default();
        NormBlock {
            number_conversion: d.number_conversion,
            agglutinate: d.agglutinate,
            agglutination_min_count: d.agglutination_min_count,
            agglutination_max_n: d.agglutination_max_n,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitBlock {
    pub dev_fraction: f64,
}

impl Default for SplitBlock {
    fn default() -> Self {
        // Dev share of the original training release.
        SplitBlock {
            dev_fraction: 3863.0 / 13684.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoostBlock {
    pub max_rounds: usize,
    pub dev_patience: usize,
    pub epsilon: Option<f64>,
    pub title_max_n: usize,
    pub body_max_n: usize,
    pub ingredient_max_n: usize,
}

impl Default for BoostBlock {
    fn default() -> Self {
        let c = BoostConfig::default();
        let s = cuisto::FeatureSchema::default();
        BoostBlock {
            max_rounds: c.max_rounds,
            dev_patience: c.dev_patience,
            epsilon: c.smoothing_epsilon,
            title_max_n: s.title_max_n,
            body_max_n: s.body_max_n,
            ingredient_max_n: s.ingredient_max_n,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SvmBlock {
    pub lambda: f64,
    pub epochs: usize,
    /// Keep the top-k terms by mutual information; unset uses the task default.
    pub mi_k: Option<usize>,
    /// Disable the MI filter even where the task default enables it.
    pub no_filter: bool,
}

impl Default for SvmBlock {
    fn default() -> Self {
        let c = SvmConfig::default();
        SvmBlock {
            lambda: c.lambda,
            epochs: c.epochs,
            mi_k: None,
            no_filter: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CosineBlock {
    pub gini_threshold: f64,
    pub mode: String,
    /// Title weight in every hierarchy stage when no hierarchy file is given.
    pub alpha: f64,
}

impl Default for CosineBlock {
    fn default() -> Self {
        CosineBlock {
            gini_threshold: 0.45,
            mode: DenominatorMode::Standard.name().to_owned(),
            alpha: 0.5,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FusionBlock {
    pub concordance_threshold: Option<f64>,
    pub veto: Option<f64>,
    pub weights: BTreeMap<String, f64>,
    pub vetoes: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FusionFile {
    fusion: FusionBlock,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub task: Task,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub paths: Paths,
    #[serde(default)]
    pub norm: NormBlock,
    #[serde(default)]
    pub split: SplitBlock,
    #[serde(default)]
    pub boost: BoostBlock,
    #[serde(default)]
    pub svm: SvmBlock,
    #[serde(default)]
    pub cosine: CosineBlock,
    #[serde(default)]
    pub fusion: FusionBlock,
}

/// Flag values that win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub task: Option<Task>,
    pub seed: Option<u64>,
    pub train: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

fn resolve(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(path) = p {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
}

impl PipelineConfig {
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut config: PipelineConfig =
            toml::from_str(text).map_err(|e| CliError::config(format!("config: {}", e.message())))?;
        let p = &mut config.paths;
        for field in [
            &mut p.train,
            &mut p.test,
            &mut p.abbreviations,
            &mut p.hierarchy,
            &mut p.fusion,
            &mut p.boosts,
            &mut p.qrels,
            &mut p.output,
        ] {
            resolve(base, field);
        }
        if let Some(path) = config.paths.fusion.clone() {
            let text = read(&path)?;
            let file: FusionFile = toml::from_str(&text).map_err(|e| {
                CliError::config(format!("fusion file {}: {}", path.display(), e.message()))
            })?;
            config.fusion = file.fusion;
        }
        Ok(config)
    }

    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let text = read(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut config = Self::parse(&text, base)?;
        config.apply(overrides);
        config.validate()?;
        Ok(config)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(t) = o.task {
            self.task = t;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        for (dst, src) in [
            (&mut self.paths.train, &o.train),
            (&mut self.paths.test, &o.test),
            (&mut self.paths.output, &o.output),
        ] {
            if src.is_some() {
                dst.clone_from(src);
            }
        }
    }

    /// Existence of every referenced input and sanity of every block.
    pub fn validate(&self) -> Result<(), CliError> {
        let p = &self.paths;
        for (name, path) in [
            ("train", &p.train),
            ("test", &p.test),
            ("abbreviations", &p.abbreviations),
            ("hierarchy", &p.hierarchy),
            ("fusion", &p.fusion),
            ("boosts", &p.boosts),
            ("qrels", &p.qrels),
        ] {
            if let Some(path) = path {
                if !path.is_file() {
                    return Err(CliError::config(format!(
                        "config: {name} file {} does not exist",
                        path.display()
                    )));
                }
            }
        }
        if p.output.is_none() {
            return Err(CliError::config("config: paths.output is required"));
        }
        if !(0.0..=1.0).contains(&self.cosine.alpha) {
            return Err(CliError::config(format!(
                "config: cosine.alpha {} outside [0, 1]",
                self.cosine.alpha
            )));
        }
        self.norm_config()?.validate()?;
        self.boost_config().validate()?;
        self.svm_config().validate()?;
        self.electre_params().validate()?;
        self.denominator_mode()?;
        cuisto::SplitSpec::new(self.split.dev_fraction, self.seed)?;
        if !(0.0..=1.0).contains(&self.cosine.gini_threshold) {
            return Err(CliError::config(format!(
                "config: cosine.gini_threshold {} outside [0, 1]",
                self.cosine.gini_threshold
            )));
        }
        Ok(())
    }

    pub fn output_dir(&self) -> &Path {
        self.paths.output.as_deref().expect("validated")
    }

    pub fn require(&self, name: &str, path: &Option<PathBuf>) -> Result<PathBuf, CliError> {
        path.clone()
            .ok_or_else(|| CliError::config(format!("config: paths.{name} is required for this command")))
    }

    pub fn norm_config(&self) -> Result<NormConfig, CliError> {
        let mut c = NormConfig {
            number_conversion: self.norm.number_conversion,
            agglutinate: self.norm.agglutinate,
            agglutination_min_count: self.norm.agglutination_min_count,
            agglutination_max_n: self.norm.agglutination_max_n,
            number_words: french_number_words(),
            ..NormConfig::default()
        };
        if let Some(path) = &self.paths.abbreviations {
            c.abbrev_table = load_abbreviations(path)?;
        }
        Ok(c)
    }

    pub fn boost_config(&self) -> BoostConfig {
        BoostConfig {
            max_rounds: self.boost.max_rounds,
            smoothing_epsilon: self.boost.epsilon,
            dev_patience: self.boost.dev_patience,
        }
    }

    pub fn feature_schema(&self) -> cuisto::FeatureSchema {
        cuisto::FeatureSchema {
            title_max_n: self.boost.title_max_n,
            body_max_n: self.boost.body_max_n,
            ingredient_max_n: self.boost.ingredient_max_n,
        }
    }

    pub fn svm_config(&self) -> SvmConfig {
        SvmConfig {
            lambda: self.svm.lambda,
            epochs: self.svm.epochs,
            seed: self.seed,
        }
    }

    /// T2 filters to the top 10 000 terms by default; T1 keeps everything.
    pub fn mi_k(&self) -> Option<usize> {
        if self.svm.no_filter {
            return None;
        }
        self.svm.mi_k.or(match self.task {
            Task::T2 => Some(10_000),
            _ => None,
        })
    }

    pub fn denominator_mode(&self) -> Result<DenominatorMode, CliError> {
        DenominatorMode::parse(&self.cosine.mode).ok_or_else(|| {
            CliError::config(format!(
                "config: cosine.mode {:?} is neither \"standard\" nor \"literal\"",
                self.cosine.mode
            ))
        })
    }

    pub fn electre_params(&self) -> ElectreParams {
        let mut p = match self.task {
            Task::T2 => ElectreParams::dish_type_defaults(),
            _ => ElectreParams::difficulty_defaults(),
        };
        if let Some(sc) = self.fusion.concordance_threshold {
            p.concordance_threshold = sc;
        }
        if let Some(v) = self.fusion.veto {
            p.default_veto = v;
        }
        p.weights = self.fusion.weights.clone();
        p.vetoes = self.fusion.vetoes.clone();
        p
    }
}

pub(crate) fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| {
        CliError::config(format!("io: cannot read {}: {e}", path.display()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> PipelineConfig {
        PipelineConfig::parse(text, Path::new("/base")).unwrap()
    }

    #[test]
    fn defaults_and_relative_paths() {
        let c = parse("task = \"T2\"\n[paths]\ntrain = \"train.xml\"\noutput = \"/abs/out\"\n");
        assert_eq!(c.task, Task::T2);
        assert_eq!(c.paths.train.as_deref(), Some(Path::new("/base/train.xml")));
        assert_eq!(c.paths.output.as_deref(), Some(Path::new("/abs/out")));
        assert_eq!(c.mi_k(), Some(10_000));
        assert_eq!(c.electre_params(), ElectreParams::dish_type_defaults());
        assert_eq!(c.cosine.gini_threshold, 0.45);
        assert!((c.split.dev_fraction - 0.2823).abs() < 1e-4);
    }

    #[test]
    fn flags_win() {
        let mut c = parse("task = \"T1\"\nseed = 3\n");
        c.apply(&Overrides {
            seed: Some(9),
            task: Some(Task::T2),
            ..Overrides::default()
        });
        assert_eq!((c.seed, c.task), (9, Task::T2));
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = PipelineConfig::parse("task = \"T1\"\nsede = 3\n", Path::new(".")).unwrap_err();
        assert_eq!(err.code(), 2);
        assert!(PipelineConfig::parse("task = \"T3\"\n", Path::new(".")).is_err());
    }

    #[test]
    fn missing_file_names_path() {
        let mut c = parse("task = \"T1\"\n[paths]\nabbreviations = \"nope.tsv\"\noutput = \"o\"\n");
        c.paths.abbreviations = Some(PathBuf::from("/definitely/missing/abbrev.tsv"));
        let err = c.validate().unwrap_err();
        assert_eq!(err.code(), 2);
        assert!(err.to_string().contains("/definitely/missing/abbrev.tsv"));
    }

    #[test]
    fn fusion_overrides() {
        let c = parse("task = \"T1\"\n[fusion]\nconcordance_threshold = 0.8\nweights = { svm = 2.0 }\n");
        let p = c.electre_params();
        assert_eq!(p.concordance_threshold, 0.8);
        assert_eq!(p.default_veto, 0.5);
        assert_eq!(p.weight("svm"), 2.0);
    }
}
