//! Text normalization: tokenization with clitic splitting, abbreviation
//! expansion, digits to French words, and frequent n-gram agglutination.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Joins the parts of an agglutinated token.
pub const COMPOSITE_JOINER: char = '_';

#[derive(Debug, Clone, PartialEq)]
pub struct NormConfig {
    pub abbrev_table: BTreeMap<String, String>,
    pub number_conversion: bool,
    pub agglutinate: bool,
    pub agglutination_min_count: usize,
    pub agglutination_max_n: usize,
    /// Atomic number words; compounds are assembled from these.
    pub number_words: BTreeMap<u32, String>,
}

impl Default for NormConfig {
    fn default() -> Self {
        NormConfig {
            abbrev_table: [("th", "thermostat"), ("kg", "kilogramme")]
                .into_iter()
                .map(|(k, v)| (k.to_owned(), v.to_owned()))
                .collect(),
            number_conversion: true,
            agglutinate: false,
            agglutination_min_count: 10,
            agglutination_max_n: 3,
            number_words: french_number_words(),
        }
    }
}

impl NormConfig {
    pub fn validate(&self) -> Result<()> {
        for key in self.abbrev_table.keys() {
            if key.is_empty() || key.chars().any(char::is_whitespace) || key.to_lowercase() != *key {
                return Err(Error::Config(format!(
                    "abbreviation key {key:?} must be lowercase and whitespace-free"
                )));
            }
        }
        if self.agglutination_min_count < 2 {
            return Err(Error::Config("agglutination_min_count must be at least 2".into()));
        }
        if !(2..=4).contains(&self.agglutination_max_n) {
            return Err(Error::Config("agglutination_max_n must lie in [2, 4]".into()));
        }
        if self.number_conversion {
            for n in ATOMS {
                if !self.number_words.contains_key(&n) {
                    return Err(Error::Config(format!("number word table lacks {n}")));
                }
            }
        }
        Ok(())
    }
}

const ATOMS: [u32; 23] = [
    0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 20, 30, 40, 50, 60, 100,
];

pub fn french_number_words() -> BTreeMap<u32, String> {
    let words = [
        "zéro", "un", "deux", "trois", "quatre", "cinq", "six", "sept", "huit", "neuf", "dix",
        "onze", "douze", "treize", "quatorze", "quinze", "seize", "vingt", "trente", "quarante",
        "cinquante", "soixante", "cent",
    ];
    ATOMS.into_iter().zip(words).map(|(n, w)| (n, w.to_owned())).collect()
}

/// Reads `short<TAB>long` lines; blank lines and `#` comments are skipped.
pub fn parse_abbreviations(text: &str) -> Result<BTreeMap<String, String>> {
    let mut table = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (short, long) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse("abbreviation table", i + 1, "expected short<TAB>long"))?;
        let short = short.trim();
        if short.is_empty() || short.chars().any(char::is_whitespace) || short.to_lowercase() != short
        {
            return Err(Error::parse(
                "abbreviation table",
                i + 1,
                format!("key {short:?} must be lowercase and whitespace-free"),
            ));
        }
        table.insert(short.to_owned(), long.trim().to_owned());
    }
    Ok(table)
}

pub fn load_abbreviations(path: impl AsRef<Path>) -> Result<BTreeMap<String, String>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_abbreviations(&text)
}

/// Normalized tokens: lowercase, whitespace-free, non-empty.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenStream(Vec<String>);

impl TokenStream {
    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn joined(&self) -> String {
        self.0.join(" ")
    }
}

#[derive(Clone, Copy, PartialEq)]
enum RunKind {
    Alpha,
    Digit,
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '’' | 'ʼ')
}

/// Step 1. Punctuation becomes a separator, apostrophe clitics are split off
/// with their apostrophe ("l'"), intra-word hyphens and decimal commas stay,
/// and letter/digit boundaries split ("20cl" gives "20", "cl").
pub fn tokenize(text: &str) -> Vec<String> {
    let lowered = text.to_lowercase();
    let chars: Vec<char> = lowered.chars().collect();
    let mut tokens = Vec::new();
    let mut cur = String::new();
    let mut kind = RunKind::Alpha;
    let flush = |cur: &mut String, tokens: &mut Vec<String>| {
        if !cur.is_empty() {
            tokens.push(std::mem::take(cur));
        }
    };
    for (i, &c) in chars.iter().enumerate() {
        let next = chars.get(i + 1).copied();
        if c.is_alphanumeric() {
            let k = if c.is_ascii_digit() { RunKind::Digit } else { RunKind::Alpha };
            if !cur.is_empty() && k != kind {
                flush(&mut cur, &mut tokens);
            }
            kind = k;
            cur.push(c);
        } else if is_apostrophe(c) && !cur.is_empty() && kind == RunKind::Alpha {
            cur.push('\'');
            flush(&mut cur, &mut tokens);
        } else if c == '-'
            && !cur.is_empty()
            && kind == RunKind::Alpha
            && next.is_some_and(|n| n.is_alphabetic())
        {
            cur.push('-');
        } else if c == ','
            && !cur.is_empty()
            && kind == RunKind::Digit
            && !cur.contains(',')
            && next.is_some_and(|n| n.is_ascii_digit())
        {
            cur.push(',');
        } else {
            flush(&mut cur, &mut tokens);
        }
    }
    flush(&mut cur, &mut tokens);
    tokens
}

fn cardinal(n: u32, words: &BTreeMap<u32, String>, out: &mut Vec<String>) {
    let w = |k: u32| words[&k].clone();
    match n {
        0..=16 => out.push(w(n)),
        17..=19 => out.push(format!("{}-{}", w(10), w(n - 10))),
        20..=69 => {
            let (tens, unit) = (n / 10 * 10, n % 10);
            match unit {
                0 => out.push(w(tens)),
                1 => out.extend([w(tens), "et".to_owned(), w(1)]),
                _ => out.push(format!("{}-{}", w(tens), w(unit))),
            }
        }
        70..=79 => {
            let rest = n - 60;
            if rest == 11 {
                out.extend([w(60), "et".to_owned(), w(11)]);
            } else {
                let mut tail = Vec::new();
                cardinal(rest, words, &mut tail);
                out.push(format!("{}-{}", w(60), tail.join("-")));
            }
        }
        80 => out.push(format!("{}-{}s", w(4), w(20))),
        81..=99 => {
            let mut tail = Vec::new();
            cardinal(n - 80, words, &mut tail);
            out.push(format!("{}-{}-{}", w(4), w(20), tail.join("-")));
        }
        100..=999 => {
            let (hundreds, rest) = (n / 100, n % 100);
            if hundreds > 1 {
                out.push(w(hundreds));
            }
            if hundreds > 1 && rest == 0 {
                out.push(format!("{}s", w(100)));
            } else {
                out.push(w(100));
            }
            if rest > 0 {
                cardinal(rest, words, out);
            }
        }
        _ => unreachable!("cardinal outside 0..=999"),
    }
}

fn small_number(digits: &str) -> Option<u32> {
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse::<u32>().ok().filter(|&n| n <= 999)
}

/// Step 3 for a single token. `None` means the token passes through.
pub fn number_to_words(token: &str, words: &BTreeMap<u32, String>) -> Option<Vec<String>> {
    let mut out = Vec::new();
    match token.split_once(',') {
        None => cardinal(small_number(token)?, words, &mut out),
        Some((int, frac)) => {
            let n = small_number(int)?;
            let zeros = frac.bytes().take_while(|&b| b == b'0').count();
            let rest = &frac[zeros..];
            let m = if rest.is_empty() { None } else { Some(small_number(rest)?) };
            if zeros == 0 && m.is_none() {
                return None;
            }
            cardinal(n, words, &mut out);
            out.push("virgule".to_owned());
            out.extend(std::iter::repeat_n(words[&0].clone(), zeros));
            if let Some(m) = m {
                cardinal(m, words, &mut out);
            }
        }
    }
    Some(out)
}

/// A fitted set of word n-grams to merge into composite tokens.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Agglutinator {
    ngrams: BTreeSet<Vec<String>>,
    max_n: usize,
}

impl Agglutinator {
    pub fn from_ngrams(ngrams: impl IntoIterator<Item = Vec<String>>) -> Self {
        let ngrams: BTreeSet<Vec<String>> = ngrams.into_iter().filter(|g| g.len() >= 2).collect();
        let max_n = ngrams.iter().map(Vec::len).max().unwrap_or(0);
        Agglutinator { ngrams, max_n }
    }

    /// Keeps an n-gram (2 <= n <= max_n, count >= min_count) unless some
    /// longer kept-eligible n-gram containing it is exactly as frequent, i.e.
    /// it never occurs outside that longer one.
    pub fn fit<'a>(
        streams: impl IntoIterator<Item = &'a [String]>,
        min_count: usize,
        max_n: usize,
    ) -> Self {
        let mut counts: HashMap<&'a [String], usize> = HashMap::new();
        for s in streams {
            for n in 2..=max_n {
                for w in s.windows(n) {
                    *counts.entry(w).or_insert(0) += 1;
                }
            }
        }
        let eligible: HashMap<&[String], usize> =
            counts.into_iter().filter(|&(_, c)| c >= min_count).collect();
        let mut subsumed: BTreeSet<&[String]> = BTreeSet::new();
        for (&gram, &count) in &eligible {
            for n in 2..gram.len() {
                for sub in gram.windows(n) {
                    if eligible.get(sub).is_some_and(|&c| c <= count) {
                        subsumed.insert(sub);
                    }
                }
            }
        }
        Agglutinator::from_ngrams(
            eligible
                .keys()
                .filter(|g| !subsumed.contains(*g))
                .map(|g| g.to_vec()),
        )
    }

    pub fn ngrams(&self) -> &BTreeSet<Vec<String>> {
        &self.ngrams
    }

    pub fn is_empty(&self) -> bool {
        self.ngrams.is_empty()
    }

    /// Longest match first, scanning left to right.
    pub fn apply(&self, tokens: &[String]) -> Vec<String> {
        let mut out = Vec::with_capacity(tokens.len());
        let mut i = 0;
        'outer: while i < tokens.len() {
            for n in (2..=self.max_n.min(tokens.len() - i)).rev() {
                let window = &tokens[i..i + n];
                if self.ngrams.contains(window) {
                    out.push(window.join(&COMPOSITE_JOINER.to_string()));
                    i += n;
                    continue 'outer;
                }
            }
            out.push(tokens[i].clone());
            i += 1;
        }
        out
    }

    /// Sorted newline-delimited list of space-joined n-grams.
    pub fn to_text(&self) -> String {
        let mut lines: Vec<String> = self.ngrams.iter().map(|g| g.join(" ")).collect();
        lines.sort();
        let mut out = String::new();
        for l in lines {
            let _ = writeln!(out, "{l}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut grams = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let gram: Vec<String> = line.split(' ').map(str::to_owned).collect();
            if gram.len() < 2 || gram.iter().any(String::is_empty) {
                return Err(Error::parse("agglutination model", i + 1, "need >= 2 words"));
            }
            grams.push(gram);
        }
        Ok(Agglutinator::from_ngrams(grams))
    }
}

/// Configured normalizer, optionally carrying a fitted agglutination model.
#[derive(Debug, Clone, Default)]
pub struct Normalizer {
    config: NormConfig,
    agglutinator: Option<Agglutinator>,
}

impl Normalizer {
    pub fn new(config: NormConfig) -> Result<Self> {
        config.validate()?;
        Ok(Normalizer {
            config,
            agglutinator: None,
        })
    }

    pub fn with_agglutinator(mut self, model: Agglutinator) -> Self {
        self.agglutinator = Some(model);
        self
    }

    pub fn config(&self) -> &NormConfig {
        &self.config
    }

    pub fn agglutinator(&self) -> Option<&Agglutinator> {
        self.agglutinator.as_ref()
    }

    /// Steps 1 to 3.
    pub fn base_tokens(&self, text: &str) -> Vec<String> {
        let mut out = Vec::new();
        for tok in tokenize(text) {
            if let Some(long) = self.config.abbrev_table.get(&tok) {
                for t in tokenize(long) {
                    self.push_number_step(t, &mut out);
                }
            } else {
                self.push_number_step(tok, &mut out);
            }
        }
        out
    }

    fn push_number_step(&self, tok: String, out: &mut Vec<String>) {
        if self.config.number_conversion {
            if let Some(words) = number_to_words(&tok, &self.config.number_words) {
                out.extend(words);
                return;
            }
        }
        out.push(tok);
    }

    pub fn normalize(&self, text: &str) -> TokenStream {
        let base = self.base_tokens(text);
        match (&self.agglutinator, self.config.agglutinate) {
            (Some(model), true) => TokenStream(model.apply(&base)),
            _ => TokenStream(base),
        }
    }

    /// Fits the agglutination model on titles and bodies, each scanned separately.
    pub fn fit_agglutinator(&self, corpus: &Corpus) -> Result<Agglutinator> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let streams: Vec<Vec<String>> = corpus
            .recipes()
            .iter()
            .flat_map(|r| [self.base_tokens(&r.title), self.base_tokens(&r.body)])
            .collect();
        Ok(Agglutinator::fit(
            streams.iter().map(Vec::as_slice),
            self.config.agglutination_min_count,
            self.config.agglutination_max_n,
        ))
    }
}

/// Normalize with an explicit configuration and optional fitted model.
pub fn normalize(text: &str, config: &NormConfig, model: Option<&Agglutinator>) -> TokenStream {
    let norm = Normalizer {
        config: config.clone(),
        agglutinator: model.cloned(),
    };
    norm.normalize(text)
}

/// Every contiguous n-gram for 1 <= n <= max_n, space-joined, with repeats.
pub fn ngrams(tokens: &[String], max_n: usize) -> Vec<String> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        out.extend(tokens.windows(n).map(|w| w.join(" ")));
    }
    out
}
