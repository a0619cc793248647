//! Recipe classification and ingredient extraction.
//!
//! Text goes through [`textnorm`] into [`features`]; three classifiers
//! ([`boost`], [`svm`], [`cosine`]) each emit a [`ScoreVector`] per recipe,
//! which [`fusion`] combines. [`extraction`] builds ingredient lists and
//! [`eval`] scores both kinds of output.

pub mod boost;
pub mod corpus;
pub mod cosine;
pub mod error;
pub mod eval;
pub mod extraction;
pub mod features;
pub mod fusion;
pub mod rng;
pub mod svm;
pub mod textnorm;

pub use boost::{BoostConfig, BoostFeatures, BoostModel, FeatureSchema};
pub use corpus::{Corpus, Difficulty, DishType, LabelKind, Recipe, SplitSpec};
pub use cosine::{CosineModel, DenominatorMode, HierarchicalModel, HierarchySpec};
pub use error::{Error, Result};
pub use eval::{ClassificationReport, ItemMatcher, MapReport, Qrels};
pub use extraction::{CandidateList, IngredientLexicon};
pub use features::{Feed, LexiconStats, SparseVector, TermCounts};
pub use fusion::{ElectreParams, ScoreVector};
pub use svm::{OvoModel, SvmConfig};
pub use textnorm::{NormConfig, Normalizer};
