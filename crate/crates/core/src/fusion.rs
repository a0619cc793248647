//! Per-method score normalization and the two late-fusion rules: linear
//! combination and ELECTRE outranking with kernel extraction.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

/// Per-class scores emitted by one method for one recipe.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub recipe_id: String,
    pub method_id: String,
    pub scores: BTreeMap<String, f64>,
}

impl ScoreVector {
    pub fn new(
        recipe_id: impl Into<String>,
        method_id: impl Into<String>,
        scores: BTreeMap<String, f64>,
    ) -> Self {
        assert!(
            scores.values().all(|s| s.is_finite()),
            "score vectors hold finite values only"
        );
        ScoreVector {
            recipe_id: recipe_id.into(),
            method_id: method_id.into(),
            scores,
        }
    }

    pub fn from_pairs<S: Into<String>>(
        recipe_id: impl Into<String>,
        method_id: impl Into<String>,
        pairs: impl IntoIterator<Item = (S, f64)>,
    ) -> Self {
        Self::new(
            recipe_id,
            method_id,
            pairs.into_iter().map(|(c, s)| (c.into(), s)).collect(),
        )
    }

    pub fn classes(&self) -> impl Iterator<Item = &str> {
        self.scores.keys().map(String::as_str)
    }

    pub fn get(&self, class: &str) -> Option<f64> {
        self.scores.get(class).copied()
    }

    /// Highest-scoring class; ties go to the lexicographically first class.
    pub fn argmax(&self) -> Option<&str> {
        let mut best: Option<(&str, f64)> = None;
        for (c, &s) in &self.scores {
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((c, s));
            }
        }
        best.map(|(c, _)| c)
    }

    pub fn sum(&self) -> f64 {
        self.scores.values().sum()
    }
}

/// Rescales scores to sum to one. Negative inputs are first shifted so the
/// minimum becomes zero; an all-zero vector maps to the uniform vector.
pub fn normalize_scores(v: &ScoreVector) -> ScoreVector {
    let n = v.scores.len();
    let min = v.scores.values().copied().fold(f64::INFINITY, f64::min);
    let shift = if min < 0.0 { -min } else { 0.0 };
    let shifted: Vec<f64> = v.scores.values().map(|s| s + shift).collect();
    let total: f64 = shifted.iter().sum();
    let scores = v
        .scores
        .keys()
        .zip(shifted)
        .map(|(c, s)| {
            let value = if total > 0.0 { s / total } else { 1.0 / n as f64 };
            (c.clone(), value)
        })
        .collect();
    ScoreVector::new(v.recipe_id.clone(), v.method_id.clone(), scores)
}

fn check_compatible(vectors: &[ScoreVector]) -> Result<Vec<&str>> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::ClassSetMismatch("no score vectors to fuse".into()))?;
    let classes: Vec<&str> = first.classes().collect();
    if classes.is_empty() {
        return Err(Error::ClassSetMismatch("score vector without classes".into()));
    }
    for v in &vectors[1..] {
        if !v.classes().eq(classes.iter().copied()) {
            return Err(Error::ClassSetMismatch(format!(
                "method {} differs from method {} on recipe {}",
                v.method_id, first.method_id, first.recipe_id
            )));
        }
        if v.recipe_id != first.recipe_id {
            return Err(Error::ClassSetMismatch(format!(
                "vectors for recipes {} and {} fused together",
                first.recipe_id, v.recipe_id
            )));
        }
    }
    Ok(classes)
}

/// Sums normalized scores across methods and picks the argmax.
pub fn fuse_linear(vectors: &[ScoreVector]) -> Result<(String, ScoreVector)> {
    let classes = check_compatible(vectors)?;
    let fused: BTreeMap<String, f64> = classes
        .iter()
        .map(|&c| (c.to_owned(), vectors.iter().map(|v| v.scores[c]).sum()))
        .collect();
    let fused = ScoreVector::new(vectors[0].recipe_id.clone(), "linear", fused);
    let winner = fused.argmax().expect("non-empty").to_owned();
    Ok((winner, fused))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElectreParams {
    pub concordance_threshold: f64,
    pub default_weight: f64,
    pub default_veto: f64,
    /// Per-method overrides of `default_weight`.
    pub weights: BTreeMap<String, f64>,
    /// Per-method overrides of `default_veto`.
    pub vetoes: BTreeMap<String, f64>,
}

impl ElectreParams {
    pub fn uniform(concordance_threshold: f64, veto: f64) -> Self {
        ElectreParams {
            concordance_threshold,
            default_weight: 1.0,
            default_veto: veto,
            weights: BTreeMap::new(),
            vetoes: BTreeMap::new(),
        }
    }

    /// Difficulty task: unit weights, sc = 0.7, veto 0.5.
    pub fn difficulty_defaults() -> Self {
        Self::uniform(0.7, 0.5)
    }

    /// Dish-type task: unit weights, sc = 0.6, veto 0.5.
    pub fn dish_type_defaults() -> Self {
        Self::uniform(0.6, 0.5)
    }

    pub fn weight(&self, method: &str) -> f64 {
        self.weights.get(method).copied().unwrap_or(self.default_weight)
    }

    pub fn veto(&self, method: &str) -> f64 {
        self.vetoes.get(method).copied().unwrap_or(self.default_veto)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !unit(self.concordance_threshold) {
            return Err(Error::Config("concordance threshold must lie in [0, 1]".into()));
        }
        if !(self.default_weight > 0.0) || self.weights.values().any(|&w| !(w > 0.0)) {
            return Err(Error::Config("method weights must be positive".into()));
        }
        if !unit(self.default_veto) || self.vetoes.values().any(|&v| !unit(v)) {
            return Err(Error::Config("veto values must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Outranking relation over the candidate classes of one recipe.
#[derive(Debug, Clone, PartialEq)]
pub struct OutrankingRelation {
    pub classes: Vec<String>,
    /// `(c, c')` present means c outranks c'.
    pub edges: BTreeSet<(String, String)>,
    /// Classes outranked by no other class.
    pub kernel: BTreeSet<String>,
    /// Concordance index for every ordered pair of distinct classes.
    pub concordance: BTreeMap<(String, String), f64>,
}

impl OutrankingRelation {
    pub fn outranks(&self, c: &str, other: &str) -> bool {
        self.edges.contains(&(c.to_owned(), other.to_owned()))
    }
}

pub fn electre_relation(
    vectors: &[ScoreVector],
    params: &ElectreParams,
) -> Result<OutrankingRelation> {
    params.validate()?;
    let classes = check_compatible(vectors)?;
    let weights: Vec<f64> = vectors.iter().map(|v| params.weight(&v.method_id)).collect();
    let vetoes: Vec<f64> = vectors.iter().map(|v| params.veto(&v.method_id)).collect();
    let total_weight: f64 = weights.iter().sum();

    let mut edges = BTreeSet::new();
    let mut concordance = BTreeMap::new();
    for &c in &classes {
        for &other in &classes {
            if c == other {
                continue;
            }
            let mut agreeing = 0.0;
            let mut vetoed = false;
            for (i, v) in vectors.iter().enumerate() {
                let (mine, theirs) = (v.scores[c], v.scores[other]);
                if mine >= theirs {
                    agreeing += weights[i];
                } else if theirs - mine >= vetoes[i] {
                    vetoed = true;
                }
            }
            let conc = agreeing / total_weight;
            concordance.insert((c.to_owned(), other.to_owned()), conc);
            if conc >= params.concordance_threshold && !vetoed {
                edges.insert((c.to_owned(), other.to_owned()));
            }
        }
    }
    let kernel = classes
        .iter()
        .filter(|&&c| !edges.iter().any(|(_, beaten)| beaten == c))
        .map(|&c| c.to_owned())
        .collect();
    Ok(OutrankingRelation {
        classes: classes.iter().map(|&c| c.to_owned()).collect(),
        edges,
        kernel,
        concordance,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElectreDecision {
    pub class: String,
    pub relation: OutrankingRelation,
    /// True when the kernel was not a singleton and the linear winner was used.
    pub fell_back: bool,
}

/// Singleton kernel wins; otherwise the linear-combination winner.
pub fn fuse_electre(vectors: &[ScoreVector], params: &ElectreParams) -> Result<ElectreDecision> {
    let relation = electre_relation(vectors, params)?;
    if relation.kernel.len() == 1 {
        let class = relation.kernel.iter().next().cloned().expect("singleton");
        return Ok(ElectreDecision {
            class,
            relation,
            fell_back: false,
        });
    }
    let (class, _) = fuse_linear(vectors)?;
    Ok(ElectreDecision {
        class,
        relation,
        fell_back: true,
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn sv(method: &str, scores: &[(&str, f64)]) -> ScoreVector {
        ScoreVector::from_pairs("r1", method, scores.iter().map(|&(c, s)| (c, s)))
    }

    fn values(v: &ScoreVector) -> Vec<f64> {
        v.scores.values().copied().collect()
    }

    #[test]
    fn normalize_examples() {
        let n = normalize_scores(&sv("m", &[("a", 2.0), ("b", 1.0), ("c", 1.0)]));
        assert_eq!(values(&n), vec![0.5, 0.25, 0.25]);
        let n = normalize_scores(&sv("m", &[("a", 0.0), ("b", 0.0), ("c", 0.0)]));
        assert_eq!(values(&n), vec![1.0 / 3.0; 3]);
        let n = normalize_scores(&sv("m", &[("a", -1.0), ("b", 0.0), ("c", 3.0)]));
        assert_eq!(values(&n), vec![0.0, 0.2, 0.8]);
    }

    #[test]
    fn linear_sum_breaks_disagreement() {
        let a = sv("m1", &[("a", 0.6), ("b", 0.4)]);
        let b = sv("m2", &[("a", 0.45), ("b", 0.55)]);
        let (winner, fused) = fuse_linear(&[a, b]).unwrap();
        assert_eq!(winner, "a");
        assert!((fused.scores["a"] - 1.05).abs() < 1e-15);
        assert!((fused.scores["b"] - 0.95).abs() < 1e-15);
    }

    #[test]
    fn single_method_linear_is_its_argmax() {
        let a = sv("m1", &[("a", 0.2), ("b", 0.5), ("c", 0.3)]);
        assert_eq!(fuse_linear(&[a]).unwrap().0, "b");
    }

    #[test]
    fn linear_ties_pick_first_class() {
        let a = sv("m1", &[("x", 0.5), ("y", 0.5)]);
        assert_eq!(fuse_linear(&[a]).unwrap().0, "x");
    }

    #[test]
    fn class_mismatch_is_rejected() {
        let a = sv("m1", &[("a", 0.5), ("b", 0.5)]);
        let b = sv("m2", &[("a", 0.5), ("c", 0.5)]);
        assert!(matches!(fuse_linear(&[a, b]), Err(Error::ClassSetMismatch(_))));
        assert!(fuse_linear(&[]).is_err());
    }

    #[test]
    fn two_of_three_is_below_point_seven() {
        let params = ElectreParams::difficulty_defaults();
        let vs = [
            sv("m1", &[("a", 0.4), ("b", 0.3), ("c", 0.3)]),
            sv("m2", &[("a", 0.4), ("b", 0.3), ("c", 0.3)]),
            sv("m3", &[("a", 0.3), ("b", 0.4), ("c", 0.3)]),
        ];
        let rel = electre_relation(&vs, &params).unwrap();
        assert!((rel.concordance[&("a".into(), "b".into())] - 2.0 / 3.0).abs() < 1e-15);
        assert!(!rel.outranks("a", "b"));
    }

    #[test]
    fn full_concordance_without_veto_outranks() {
        let params = ElectreParams::difficulty_defaults();
        let vs = [
            sv("m1", &[("a", 0.6), ("b", 0.4)]),
            sv("m2", &[("a", 0.7), ("b", 0.3)]),
        ];
        let rel = electre_relation(&vs, &params).unwrap();
        assert!(rel.outranks("a", "b"));
        assert!(!rel.outranks("b", "a"));
        assert_eq!(rel.kernel, BTreeSet::from(["a".to_owned()]));
        let d = fuse_electre(&vs, &params).unwrap();
        assert_eq!(d.class, "a");
        assert!(!d.fell_back);
    }

    #[test]
    fn veto_boundary_is_inclusive() {
        let mut params = ElectreParams::uniform(0.0, 0.5);
        params.concordance_threshold = 0.5;
        let vs = [
            sv("m1", &[("a", 0.75), ("b", 0.25)]),
            sv("m2", &[("a", 0.25), ("b", 0.75)]),
        ];
        let rel = electre_relation(&vs, &params).unwrap();
        assert!(!rel.outranks("a", "b"));
        assert!(!rel.outranks("b", "a"));
        // Mutual vetoes leave both classes in the kernel: linear fallback.
        let d = fuse_electre(&vs, &params).unwrap();
        assert!(d.fell_back);
        assert_eq!(d.class, "a");
    }

    #[test]
    fn empty_kernel_uses_linear_winner() {
        // A cycle a > b > c > a leaves every class outranked.
        let params = ElectreParams::uniform(0.6, 1.0);
        let vs = [
            sv("m1", &[("a", 0.5), ("b", 0.3), ("c", 0.2)]),
            sv("m2", &[("a", 0.2), ("b", 0.5), ("c", 0.3)]),
            sv("m3", &[("a", 0.3), ("b", 0.2), ("c", 0.5)]),
        ];
        let d = fuse_electre(&vs, &params).unwrap();
        assert!(d.relation.kernel.is_empty());
        assert!(d.fell_back);
        assert_eq!(d.class, fuse_linear(&vs).unwrap().0);
    }

    #[test]
    fn params_validation() {
        assert!(ElectreParams::uniform(1.5, 0.5).validate().is_err());
        assert!(ElectreParams::uniform(0.5, -0.1).validate().is_err());
        let mut p = ElectreParams::uniform(0.5, 0.5);
        p.weights.insert("m".into(), 0.0);
        assert!(p.validate().is_err());
    }

    fn random_vectors() -> impl Strategy<Value = Vec<ScoreVector>> {
        (2usize..5, 1usize..5).prop_flat_map(|(k, m)| {
            proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, k), m).prop_map(
                move |rows| {
                    rows.into_iter()
                        .enumerate()
                        .map(|(i, row)| {
                            let raw = ScoreVector::from_pairs(
                                "r",
                                format!("m{i}"),
                                row.into_iter().enumerate().map(|(j, s)| (format!("c{j}"), s)),
                            );
                            normalize_scores(&raw)
                        })
                        .collect()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn normalized_sums_to_one(raw in proptest::collection::vec(-5.0f64..5.0, 1..6)) {
            let v = ScoreVector::from_pairs("r", "m", raw.iter().enumerate().map(|(i, &s)| (format!("c{i}"), s)));
            let n = normalize_scores(&v);
            prop_assert!((n.sum() - 1.0).abs() <= 1e-12);
            prop_assert!(n.scores.values().all(|&s| s >= 0.0));
        }

        #[test]
        fn power_of_two_scaling_is_exact(raw in proptest::collection::vec(0.0f64..5.0, 1..6), e in -20i32..20) {
            let k = 2f64.powi(e);
            let v = ScoreVector::from_pairs("r", "m", raw.iter().enumerate().map(|(i, &s)| (format!("c{i}"), s)));
            let scaled = ScoreVector::from_pairs("r", "m", raw.iter().enumerate().map(|(i, &s)| (format!("c{i}"), s * k)));
            prop_assert_eq!(normalize_scores(&v), normalize_scores(&scaled));
        }

        #[test]
        fn concordance_pairs_cover_one(vs in random_vectors()) {
            let rel = electre_relation(&vs, &ElectreParams::uniform(0.7, 0.5)).unwrap();
            for c in &rel.classes {
                for d in &rel.classes {
                    if c != d {
                        let sum = rel.concordance[&(c.clone(), d.clone())] + rel.concordance[&(d.clone(), c.clone())];
                        prop_assert!(sum >= 1.0 - 1e-12);
                    }
                }
            }
        }

        #[test]
        fn permissive_relation_agrees_with_linear(vs in random_vectors()) {
            let params = ElectreParams::uniform(0.0, 1.0);
            let d = fuse_electre(&vs, &params).unwrap();
            for c in &d.relation.classes {
                for o in &d.relation.classes {
                    if c < o {
                        prop_assert!(d.relation.outranks(c, o) || d.relation.outranks(o, c));
                    }
                }
            }
            if d.relation.kernel.len() != 1 {
                prop_assert_eq!(d.class, fuse_linear(&vs).unwrap().0);
            }
        }
    }
}
