//! Straight-line reference implementations used only by tests.
//!
//! Nothing here depends on `cuisto-core`; inputs are plain maps, vectors and
//! strings so a test can check the optimized code against a direct reading of
//! each formula.

use std::collections::{BTreeMap, BTreeSet};

// ---------------------------------------------------------------- fusion

/// Min-shift (only if a value is negative) then divide by the sum; uniform
/// when the sum is zero.
pub fn normalize(scores: &BTreeMap<String, f64>) -> BTreeMap<String, f64> {
    let mut min = f64::INFINITY;
    for v in scores.values() {
        if *v < min {
            min = *v;
        }
    }
    let shift = if min < 0.0 { -min } else { 0.0 };
    let mut total = 0.0;
    for v in scores.values() {
        total += v + shift;
    }
    let mut out = BTreeMap::new();
    for (c, v) in scores {
        let x = if total == 0.0 {
            1.0 / scores.len() as f64
        } else {
            (v + shift) / total
        };
        out.insert(c.clone(), x);
    }
    out
}

/// Sum of normalized scores; winner is the first maximum in class order.
pub fn linear_fusion(methods: &[BTreeMap<String, f64>]) -> (String, BTreeMap<String, f64>) {
    let mut sum: BTreeMap<String, f64> = BTreeMap::new();
    for m in methods {
        for (c, v) in normalize(m) {
            *sum.entry(c).or_insert(0.0) += v;
        }
    }
    let mut best: Option<(&String, f64)> = None;
    for (c, v) in &sum {
        match best {
            Some((_, b)) if *v <= b => {}
            _ => best = Some((c, *v)),
        }
    }
    (best.unwrap().0.clone(), sum)
}

/// ELECTRE kernel by enumerating every ordered class pair: the classes no
/// other class outranks. Methods are `(weight, veto, raw scores)`.
pub fn electre_kernel(
    methods: &[(f64, f64, BTreeMap<String, f64>)],
    concordance_threshold: f64,
) -> BTreeSet<String> {
    let normed: Vec<(f64, f64, BTreeMap<String, f64>)> = methods
        .iter()
        .map(|(w, v, s)| (*w, *v, normalize(s)))
        .collect();
    let classes: Vec<String> = methods[0].2.keys().cloned().collect();
    let total_weight: f64 = methods.iter().map(|m| m.0).sum();
    let mut outranked = BTreeSet::new();
    for a in &classes {
        for b in &classes {
            if a == b {
                continue;
            }
            let mut agree = 0.0;
            let mut vetoed = false;
            for (w, veto, s) in &normed {
                if s[a] >= s[b] {
                    agree += w;
                }
                if s[b] - s[a] >= *veto {
                    vetoed = true;
                }
            }
            if agree / total_weight >= concordance_threshold && !vetoed {
                outranked.insert(b.clone());
            }
        }
    }
    classes.into_iter().filter(|c| !outranked.contains(c)).collect()
}

/// ELECTRE decision; returns the chosen class and whether the linear
/// fallback was used.
pub fn electre(
    methods: &[(f64, f64, BTreeMap<String, f64>)],
    concordance_threshold: f64,
) -> (String, bool) {
    let kernel = electre_kernel(methods, concordance_threshold);
    if kernel.len() == 1 {
        return (kernel.into_iter().next().unwrap(), false);
    }
    let plain: Vec<BTreeMap<String, f64>> = methods.iter().map(|m| m.2.clone()).collect();
    (linear_fusion(&plain).0, true)
}

// -------------------------------------------------------------- features

/// Gini purity `sum_c (df_c / df)^2` from per-document term sets.
pub fn gini(docs: &[(BTreeSet<String>, String)], term: &str) -> Option<f64> {
    let mut per_class: BTreeMap<&str, f64> = BTreeMap::new();
    let mut df = 0.0;
    for (terms, label) in docs {
        if terms.contains(term) {
            df += 1.0;
            *per_class.entry(label.as_str()).or_insert(0.0) += 1.0;
        }
    }
    if df == 0.0 {
        return None;
    }
    Some(per_class.values().map(|n| (n / df) * (n / df)).sum())
}

/// Expected mutual information (bits) between "document holds term" and
/// "document is in class", from the 2x2 table of counts.
pub fn mutual_information(docs: &[(BTreeSet<String>, String)], term: &str, class: &str) -> f64 {
    let n = docs.len() as f64;
    let (mut n11, mut n10, mut n01, mut n00) = (0.0, 0.0, 0.0, 0.0);
    for (terms, label) in docs {
        match (terms.contains(term), label == class) {
            (true, true) => n11 += 1.0,
            (true, false) => n10 += 1.0,
            (false, true) => n01 += 1.0,
            (false, false) => n00 += 1.0,
        }
    }
    let cell = |nij: f64, row: f64, col: f64| {
        if nij == 0.0 {
            0.0
        } else {
            nij / n * (n * nij / (row * col)).log2()
        }
    };
    cell(n11, n11 + n10, n11 + n01)
        + cell(n10, n11 + n10, n10 + n00)
        + cell(n01, n01 + n00, n11 + n01)
        + cell(n00, n01 + n00, n10 + n00)
}

/// `tf * ln(N / df)` for the terms with a known df.
pub fn tfidf(
    counts: &BTreeMap<String, usize>,
    df: &BTreeMap<String, usize>,
    n_docs: usize,
) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for (t, tf) in counts {
        if let Some(d) = df.get(t) {
            let w = *tf as f64 * (n_docs as f64 / *d as f64).ln();
            if w != 0.0 {
                out.insert(t.clone(), w);
            }
        }
    }
    out
}

/// Cosine, or with `literal` the shared-support denominator
/// `sqrt(sum a_t^2 b_t^2)`. Zero when no term is shared.
pub fn cosine(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>, literal: bool) -> f64 {
    let mut dot = 0.0;
    let mut shared = 0.0;
    for (t, x) in a {
        if let Some(y) = b.get(t) {
            dot += x * y;
            shared += x * x * y * y;
        }
    }
    if dot == 0.0 {
        return 0.0;
    }
    if literal {
        dot / shared.sqrt()
    } else {
        let na: f64 = a.values().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = b.values().map(|x| x * x).sum::<f64>().sqrt();
        dot / (na * nb)
    }
}

// ------------------------------------------------------------------- svm

/// Dense Pegasos hinge SGD with bias as a constant feature; `orders` gives
/// the visiting order of each epoch.
pub fn pegasos(
    xs: &[Vec<f64>],
    ys: &[f64],
    lambda: f64,
    orders: &[Vec<usize>],
) -> (Vec<f64>, f64) {
    let dim = xs.first().map_or(0, Vec::len);
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut t = 0.0;
    for order in orders {
        for &i in order {
            t += 1.0;
            let eta = 1.0 / (lambda * t);
            let mut score = b;
            for j in 0..dim {
                score += w[j] * xs[i][j];
            }
            let violated = ys[i] * score < 1.0;
            for wj in w.iter_mut() {
                *wj *= 1.0 - eta * lambda;
            }
            b *= 1.0 - eta * lambda;
            if violated {
                for j in 0..dim {
                    w[j] += eta * ys[i] * xs[i][j];
                }
                b += eta * ys[i];
            }
        }
    }
    (w, b)
}

pub struct OvoOracle {
    pub classes: Vec<String>,
    /// (first class, second class, weights by term, bias).
    pub pairs: Vec<(String, String, BTreeMap<String, f64>, f64)>,
}

/// One-vs-one training on tf-idf vectors; `orders(pair_index, n)` supplies
/// the shuffling schedule.
pub fn train_ovo(
    docs: &[(BTreeMap<String, f64>, String)],
    lambda: f64,
    orders: impl Fn(usize, usize) -> Vec<Vec<usize>>,
) -> OvoOracle {
    let classes: Vec<String> = docs
        .iter()
        .map(|d| d.1.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let vocab: Vec<String> = docs
        .iter()
        .flat_map(|d| d.0.keys().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut pairs = Vec::new();
    let mut index = 0;
    for a in 0..classes.len() {
        for b in a + 1..classes.len() {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for (v, l) in docs {
                if *l == classes[a] || *l == classes[b] {
                    xs.push(vocab.iter().map(|t| v.get(t).copied().unwrap_or(0.0)).collect());
                    ys.push(if *l == classes[a] { 1.0 } else { -1.0 });
                }
            }
            let (w, bias) = pegasos(&xs, &ys, lambda, &orders(index, xs.len()));
            let weights = vocab
                .iter()
                .zip(w)
                .filter(|(_, x)| *x != 0.0)
                .map(|(t, x)| (t.clone(), x))
                .collect();
            pairs.push((classes[a].clone(), classes[b].clone(), weights, bias));
            index += 1;
        }
    }
    OvoOracle { classes, pairs }
}

impl OvoOracle {
    pub fn scores(&self, x: &BTreeMap<String, f64>) -> BTreeMap<String, f64> {
        let mut out: BTreeMap<String, f64> = self.classes.iter().map(|c| (c.clone(), 0.0)).collect();
        for (a, b, w, bias) in &self.pairs {
            let mut m = *bias;
            for (t, v) in x {
                m += w.get(t).copied().unwrap_or(0.0) * v;
            }
            *out.get_mut(a).unwrap() += m;
            *out.get_mut(b).unwrap() -= m;
        }
        out
    }
}

// ----------------------------------------------------------------- boost

/// One training or dev example: prefixed text feature keys, named numeric
/// values, label.
#[derive(Debug, Clone)]
pub struct BoostDoc {
    pub keys: BTreeSet<String>,
    pub numeric: Vec<(String, f64)>,
    pub label: String,
}

#[derive(Debug, Clone)]
pub struct BoostRound {
    pub key: String,
    pub present: Vec<f64>,
    pub absent: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct BoostOracle {
    pub classes: Vec<String>,
    pub rounds: Vec<BoostRound>,
    pub z: Vec<f64>,
    pub dev_accuracy: Vec<f64>,
}

enum Test {
    Key(String),
    Above(usize, f64),
}

fn holds(test: &Test, d: &BoostDoc) -> bool {
    match test {
        Test::Key(k) => d.keys.contains(k),
        Test::Above(f, th) => d.numeric[*f].1 > *th,
    }
}

fn first_max(v: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

/// Real AdaBoost.MH with smoothed votes, exact-Z selection, ties within a
/// relative `tie` of the minimum going to the smallest key, halting when
/// weighted error reaches 0.5, dev early stopping with `patience`.
pub fn adaboost_mh(
    train: &[BoostDoc],
    dev: &[BoostDoc],
    max_rounds: usize,
    epsilon: Option<f64>,
    patience: usize,
    tie: f64,
) -> BoostOracle {
    let classes: Vec<String> = train
        .iter()
        .map(|d| d.label.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let m = train.len();
    let k = classes.len();
    let eps = epsilon.unwrap_or(1.0 / (m * k) as f64);
    let y = |i: usize, c: usize| -> f64 { if train[i].label == classes[c] { 1.0 } else { -1.0 } };

    let mut tests: Vec<(String, Test)> = Vec::new();
    let mut df: BTreeMap<&String, usize> = BTreeMap::new();
    for d in train {
        for key in &d.keys {
            *df.entry(key).or_insert(0) += 1;
        }
    }
    for (key, n) in df {
        if n >= 2 {
            tests.push((key.clone(), Test::Key(key.clone())));
        }
    }
    for f in 0..train[0].numeric.len() {
        let mut values: Vec<f64> = train.iter().map(|d| d.numeric[f].1).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let th = (w[0] + w[1]) / 2.0;
            tests.push((format!("num:{}:{th}", train[0].numeric[f].0), Test::Above(f, th)));
        }
    }

    let mut dist = vec![vec![1.0 / (m * k) as f64; k]; m];
    let mut out = BoostOracle {
        classes: classes.clone(),
        rounds: Vec::new(),
        z: Vec::new(),
        dev_accuracy: Vec::new(),
    };
    let mut dev_margin = vec![vec![0.0; k]; dev.len()];
    let mut best = (f64::NEG_INFINITY, 0usize);

    for t in 1..=max_rounds {
        // Weights on each side of each test, summed directly.
        let mut evaluated = Vec::new();
        for (key, test) in &tests {
            let mut w = [vec![0.0; k], vec![0.0; k], vec![0.0; k], vec![0.0; k]];
            for i in 0..m {
                let side = if holds(test, &train[i]) { 0 } else { 2 };
                for c in 0..k {
                    let s = if y(i, c) > 0.0 { side } else { side + 1 };
                    w[s][c] += dist[i][c];
                }
            }
            let mut present = vec![0.0; k];
            let mut absent = vec![0.0; k];
            let mut z = 0.0;
            for c in 0..k {
                present[c] = 0.5 * ((w[0][c] + eps) / (w[1][c] + eps)).ln();
                absent[c] = 0.5 * ((w[2][c] + eps) / (w[3][c] + eps)).ln();
                z += w[0][c] * (-present[c]).exp() + w[1][c] * present[c].exp();
                z += w[2][c] * (-absent[c]).exp() + w[3][c] * absent[c].exp();
            }
            evaluated.push((z, key, test, present, absent));
        }
        let min_z = evaluated.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
        let mut chosen: Option<(f64, &String, &Test, &Vec<f64>, &Vec<f64>)> = None;
        for e in &evaluated {
            if e.0 <= min_z * (1.0 + tie) {
                match chosen {
                    Some((_, key, ..)) if key <= e.1 => {}
                    _ => chosen = Some((e.0, e.1, e.2, &e.3, &e.4)),
                }
            }
        }
        let (z, key, test, present, absent) = chosen.unwrap();
        let h = |i: usize| if holds(test, &train[i]) { present } else { absent };

        let mut err = 0.0;
        for i in 0..m {
            for c in 0..k {
                let v = h(i)[c];
                if y(i, c) * v < 0.0 {
                    err += dist[i][c];
                } else if v == 0.0 {
                    err += dist[i][c] / 2.0;
                }
            }
        }
        if err >= 0.5 {
            break;
        }
        let mut total = 0.0;
        for i in 0..m {
            for c in 0..k {
                dist[i][c] *= (-y(i, c) * h(i)[c]).exp();
                total += dist[i][c];
            }
        }
        for row in dist.iter_mut() {
            for x in row.iter_mut() {
                *x /= total;
            }
        }
        out.rounds.push(BoostRound {
            key: key.clone(),
            present: present.clone(),
            absent: absent.clone(),
        });
        out.z.push(z);
        if !dev.is_empty() {
            let mut correct = 0;
            for (j, d) in dev.iter().enumerate() {
                let v = if holds(test, d) { present } else { absent };
                for c in 0..k {
                    dev_margin[j][c] += v[c];
                }
                if classes[first_max(&dev_margin[j])] == d.label {
                    correct += 1;
                }
            }
            let acc = correct as f64 / dev.len() as f64;
            out.dev_accuracy.push(acc);
            if acc > best.0 {
                best = (acc, t);
            }
            if t - best.1 >= patience {
                break;
            }
        }
    }
    if !dev.is_empty() {
        out.rounds.truncate(best.1);
    }
    out
}

impl BoostOracle {
    fn test_of(key: &str, doc: &BoostDoc) -> bool {
        if let Some(rest) = key.strip_prefix("num:") {
            let (name, th) = rest.rsplit_once(':').unwrap();
            let th: f64 = th.parse().unwrap();
            let v = doc.numeric.iter().find(|(n, _)| n == name).unwrap().1;
            v > th
        } else {
            doc.keys.contains(key)
        }
    }

    pub fn margins(&self, doc: &BoostDoc) -> Vec<f64> {
        let mut m = vec![0.0; self.classes.len()];
        for r in &self.rounds {
            let v = if Self::test_of(&r.key, doc) { &r.present } else { &r.absent };
            for c in 0..m.len() {
                m[c] += v[c];
            }
        }
        m
    }

    pub fn confidences(&self, doc: &BoostDoc) -> Vec<f64> {
        self.margins(doc)
            .into_iter()
            .map(|x| 1.0 / (1.0 + (-2.0 * x).exp()))
            .collect()
    }

    pub fn predict(&self, doc: &BoostDoc) -> &str {
        &self.classes[first_max(&self.margins(doc))]
    }
}

// ------------------------------------------------------------------ eval

pub struct ClassMetrics {
    pub micro_f: f64,
    pub macro_f: f64,
    pub mean_distance: Option<f64>,
}

/// Confusion counting over the classes seen in gold or predictions;
/// `rank` maps a class to its ordinal level when distance is wanted.
pub fn classification_metrics(
    pairs: &[(String, String)],
    rank: Option<&dyn Fn(&str) -> i64>,
) -> ClassMetrics {
    let classes: BTreeSet<&String> = pairs.iter().flat_map(|(g, p)| [g, p]).collect();
    let mut f1s = Vec::new();
    let (mut tp_all, mut fp_all, mut fn_all) = (0.0, 0.0, 0.0);
    for c in classes {
        let tp = pairs.iter().filter(|(g, p)| g == c && p == c).count() as f64;
        let fp = pairs.iter().filter(|(g, p)| g != c && p == c).count() as f64;
        let fn_ = pairs.iter().filter(|(g, p)| g == c && p != c).count() as f64;
        tp_all += tp;
        fp_all += fp;
        fn_all += fn_;
        let p = if tp + fp == 0.0 { 0.0 } else { tp / (tp + fp) };
        let r = if tp + fn_ == 0.0 { 0.0 } else { tp / (tp + fn_) };
        f1s.push(if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) });
    }
    let p = tp_all / (tp_all + fp_all);
    let r = tp_all / (tp_all + fn_all);
    let micro_f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    let macro_f = f1s.iter().sum::<f64>() / f1s.len() as f64;
    let mean_distance = rank.map(|rank| {
        pairs
            .iter()
            .map(|(g, p)| (rank(g) - rank(p)).abs() as f64)
            .sum::<f64>()
            / pairs.len() as f64
    });
    ClassMetrics {
        micro_f,
        macro_f,
        mean_distance,
    }
}

/// Average precision, recomputing precision at k from scratch at each hit.
pub fn average_precision(ranked: &[String], gold: &BTreeSet<String>) -> f64 {
    if gold.is_empty() {
        return 0.0;
    }
    let mut sum = 0.0;
    for k in 0..ranked.len() {
        if gold.contains(&ranked[k]) {
            let hits = ranked[..=k].iter().filter(|x| gold.contains(*x)).count();
            sum += hits as f64 / (k + 1) as f64;
        }
    }
    sum / gold.len() as f64
}

pub fn mean_average_precision(
    run: &BTreeMap<String, Vec<String>>,
    qrels: &BTreeMap<String, BTreeSet<String>>,
) -> f64 {
    let mut aps = Vec::new();
    for (id, gold) in qrels {
        if gold.is_empty() {
            continue;
        }
        let ranked = run.get(id).cloned().unwrap_or_default();
        aps.push(average_precision(&ranked, gold));
    }
    aps.iter().sum::<f64>() / aps.len() as f64
}

// ------------------------------------------------------------ extraction

/// Longest match via the set of all matching windows, picked greedily by
/// start position then length, skipping overlaps.
pub fn longest_match(tokens: &[String], entries: &BTreeSet<String>, max_len: usize) -> Vec<String> {
    let mut spans = Vec::new();
    for start in 0..tokens.len() {
        for len in 1..=max_len {
            if start + len <= tokens.len() && entries.contains(&tokens[start..start + len].join(" ")) {
                spans.push((start, len));
            }
        }
    }
    spans.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
    let mut out = Vec::new();
    let mut next_free = 0;
    for (start, len) in spans {
        if start >= next_free {
            out.push(tokens[start..start + len].join(" "));
            next_free = start + len;
        }
    }
    out
}

/// Add-one posterior over `specifics` given candidate items, with
/// co-occurrence counted directly from the gold lists.
pub fn generic_posterior(
    specifics: &BTreeSet<String>,
    candidates: &[String],
    gold_lists: &[BTreeSet<String>],
) -> BTreeMap<String, (f64, usize)> {
    let mut counts = BTreeMap::new();
    for x in specifics {
        let mut n = 0;
        for l in candidates {
            if l == x {
                continue;
            }
            n += gold_lists.iter().filter(|g| g.contains(x) && g.contains(l)).count();
        }
        counts.insert(x.clone(), n);
    }
    let total: usize = counts.values().sum();
    counts
        .into_iter()
        .map(|(x, n)| (x, ((n + 1) as f64 / (total + specifics.len()) as f64, n)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn normalize_basics() {
        assert_eq!(normalize(&map(&[("a", 0.0), ("b", 0.0)]))["a"], 0.5);
        assert_eq!(normalize(&map(&[("a", -1.0), ("b", 3.0)]))["b"], 1.0);
    }

    #[test]
    fn ap_arithmetic() {
        let gold: BTreeSet<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        assert_eq!(average_precision(&["x".into(), "a".into()], &gold), 0.25);
    }

    #[test]
    fn mutual_information_of_a_perfect_predictor() {
        let docs: Vec<(BTreeSet<String>, String)> = vec![
            (["t".to_string()].into(), "a".into()),
            (BTreeSet::new(), "b".into()),
        ];
        assert!((mutual_information(&docs, "t", "a") - 1.0).abs() < 1e-15);
    }

    #[test]
    fn longest_match_prefers_long_windows() {
        let entries: BTreeSet<String> = ["creme", "creme fraiche"].iter().map(|s| s.to_string()).collect();
        let toks: Vec<String> = ["la", "creme", "fraiche", "creme"].iter().map(|s| s.to_string()).collect();
        assert_eq!(longest_match(&toks, &entries, 3), vec!["creme fraiche", "creme"]);
    }
}
