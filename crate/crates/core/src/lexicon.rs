//! Subjective lexicon, category markers and the word-polarity regressor.
//!
//! * [`intersect_lexicons`] keeps the words on which all source lexicons
//!   agree, and [`expand_with_inflections`] adds the inflected forms of
//!   each lemma.
//! * [`compute_markers`] finds words whose tweets concentrate in one class.
//! * [`train_polarity_predictor`] fits a linear SVR from word vectors to
//!   +1 (positive lexicon) / -1 (negative lexicon), which then scores any
//!   in-vocabulary word.
//!
//! Positive and negative sets are kept disjoint: a word that ends up in
//! both is dropped from both.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embeddings::EmbeddingTable;
use crate::polarity::{Polarity, NUM_CLASSES};
use crate::preprocess::{is_word_token, LabeledTweet};
use crate::scalar::Scalar;
use crate::svm::{train_svr, SvmError, SvrConfig, SvrModel};

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("marker threshold must be in (0, 1], got {0}")]
    BadThreshold(f64),
    #[error("marker min_count must be at least 1")]
    BadMinCount,
    #[error("need at least one source lexicon")]
    NoLexicons,
    #[error("polarity predictor needs positive and negative words in the embedding table ({positive} positive, {negative} negative found)")]
    InsufficientData { positive: usize, negative: usize },
    #[error(transparent)]
    Svm(#[from] SvmError),
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> LexiconError + '_ {
    move |source| LexiconError::Io { path: path.display().to_string(), source }
}

/// Reads a one-word-per-line list. Words are trimmed and lowercased to match
/// normalized tokens; blank lines and lines starting with `#` are skipped.
pub fn load_word_list(path: &Path) -> Result<BTreeSet<String>, LexiconError> {
    let body = fs::read_to_string(path).map_err(io_error(path))?;
    Ok(parse_word_list(&body))
}

pub fn parse_word_list(body: &str) -> BTreeSet<String> {
    body.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexicon {
    positive: BTreeSet<String>,
    negative: BTreeSet<String>,
}

impl Lexicon {
    /// Builds a lexicon, dropping words listed as both positive and negative.
    pub fn new<I, J, S, U>(positive: I, negative: J) -> Self
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = U>,
        S: Into<String>,
        U: Into<String>,
    {
        let mut positive: BTreeSet<String> = positive.into_iter().map(Into::into).collect();
        let mut negative: BTreeSet<String> = negative.into_iter().map(Into::into).collect();
        let both: Vec<String> = positive.intersection(&negative).cloned().collect();
        for w in &both {
            positive.remove(w);
            negative.remove(w);
        }
        Lexicon { positive, negative }
    }

    pub fn load(positive: &Path, negative: &Path) -> Result<Self, LexiconError> {
        Ok(Lexicon::new(load_word_list(positive)?, load_word_list(negative)?))
    }

    pub fn positive(&self) -> &BTreeSet<String> {
        &self.positive
    }

    pub fn negative(&self) -> &BTreeSet<String> {
        &self.negative
    }

    pub fn is_positive(&self, word: &str) -> bool {
        self.positive.contains(word)
    }

    pub fn is_negative(&self, word: &str) -> bool {
        self.negative.contains(word)
    }

    pub fn len(&self) -> usize {
        self.positive.len() + self.negative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Words positive in every source, and words negative in every source.
pub fn intersect_lexicons(sources: &[Lexicon]) -> Result<Lexicon, LexiconError> {
    let (first, rest) = sources.split_first().ok_or(LexiconError::NoLexicons)?;
    let keep = |select: fn(&Lexicon) -> &BTreeSet<String>| -> Vec<String> {
        select(first)
            .iter()
            .filter(|w| rest.iter().all(|l| select(l).contains(*w)))
            .cloned()
            .collect()
    };
    Ok(Lexicon::new(keep(Lexicon::positive), keep(Lexicon::negative)))
}

/// Lemma → inflected forms. The lemma is always one of its own forms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InflectionMap {
    forms: BTreeMap<String, BTreeSet<String>>,
}

impl InflectionMap {
    pub fn insert<S: Into<String>>(&mut self, lemma: &str, forms: impl IntoIterator<Item = S>) {
        let entry = self.forms.entry(lemma.to_string()).or_default();
        entry.insert(lemma.to_string());
        for f in forms {
            let f = f.into();
            if !f.is_empty() {
                entry.insert(f);
            }
        }
    }

    pub fn forms(&self, lemma: &str) -> Option<&BTreeSet<String>> {
        self.forms.get(lemma)
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    /// Parses `lemma<TAB>form1,form2,...` lines (lowercased).
    pub fn parse(body: &str, origin: &str) -> Result<Self, LexiconError> {
        let mut map = InflectionMap::default();
        for (i, line) in body.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (lemma, forms) = line.split_once('\t').ok_or_else(|| LexiconError::Parse {
                path: origin.to_string(),
                line: i + 1,
                message: "expected lemma<TAB>form1,form2,...".into(),
            })?;
            let lemma = lemma.trim().to_lowercase();
            if lemma.is_empty() {
                return Err(LexiconError::Parse { path: origin.to_string(), line: i + 1, message: "empty lemma".into() });
            }
            map.insert(&lemma, forms.split(',').map(|f| f.trim().to_lowercase()));
        }
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        let body = fs::read_to_string(path).map_err(io_error(path))?;
        Self::parse(&body, &path.display().to_string())
    }
}

fn expand_set(words: &BTreeSet<String>, map: &InflectionMap) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for w in words {
        match map.forms(w) {
            Some(forms) => out.extend(forms.iter().cloned()),
            None => {
                out.insert(w.clone());
            }
        }
    }
    out
}

pub fn expand_with_inflections(lexicon: &Lexicon, map: &InflectionMap) -> Lexicon {
    Lexicon::new(expand_set(&lexicon.positive, map), expand_set(&lexicon.negative, map))
}

pub const DEFAULT_MARKER_THRESHOLD: f64 = 0.75;
pub const DEFAULT_MARKER_MIN_COUNT: usize = 3;

/// Per-class marker words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkerLists {
    pub threshold: f64,
    pub min_count: usize,
    #[serde(rename = "P")]
    pub positive: BTreeSet<String>,
    #[serde(rename = "N")]
    pub negative: BTreeSet<String>,
    #[serde(rename = "NEU")]
    pub neutral: BTreeSet<String>,
    #[serde(rename = "NONE")]
    pub none: BTreeSet<String>,
}

impl MarkerLists {
    pub fn empty(threshold: f64, min_count: usize) -> Self {
        MarkerLists {
            threshold,
            min_count,
            positive: BTreeSet::new(),
            negative: BTreeSet::new(),
            neutral: BTreeSet::new(),
            none: BTreeSet::new(),
        }
    }

    pub fn list(&self, class: Polarity) -> &BTreeSet<String> {
        match class {
            Polarity::Positive => &self.positive,
            Polarity::Negative => &self.negative,
            Polarity::Neutral => &self.neutral,
            Polarity::NoOpinion => &self.none,
        }
    }

    fn list_mut(&mut self, class: Polarity) -> &mut BTreeSet<String> {
        match class {
            Polarity::Positive => &mut self.positive,
            Polarity::Negative => &mut self.negative,
            Polarity::Neutral => &mut self.neutral,
            Polarity::NoOpinion => &mut self.none,
        }
    }

    pub fn class_of(&self, word: &str) -> Option<Polarity> {
        Polarity::ALL.into_iter().find(|&c| self.list(c).contains(word))
    }

    /// Occurrences of marker tokens per class, with multiplicity.
    pub fn counts<S: AsRef<str>>(&self, tokens: &[S]) -> [usize; NUM_CLASSES] {
        let mut counts = [0; NUM_CLASSES];
        for t in tokens {
            if let Some(c) = self.class_of(t.as_ref()) {
                counts[c.index()] += 1;
            }
        }
        counts
    }
}

/// Assigns word `w` to class `c` when at least `min_count` tweets contain it
/// and the share of those tweets labeled `c` is `>= threshold`. Each word
/// counts once per tweet. If a low threshold lets several classes qualify,
/// the largest share wins, ties by class order.
pub fn compute_markers(tweets: &[LabeledTweet], threshold: f64, min_count: usize) -> Result<MarkerLists, LexiconError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(LexiconError::BadThreshold(threshold));
    }
    if min_count == 0 {
        return Err(LexiconError::BadMinCount);
    }
    let mut tallies: BTreeMap<&str, [usize; NUM_CLASSES]> = BTreeMap::new();
    for t in tweets {
        let distinct: HashSet<&str> = t.tweet.tokens.iter().map(String::as_str).filter(|w| is_word_token(w)).collect();
        for w in distinct {
            tallies.entry(w).or_default()[t.label.index()] += 1;
        }
    }
    let mut markers = MarkerLists::empty(threshold, min_count);
    for (word, counts) in tallies {
        let total: usize = counts.iter().sum();
        if total < min_count {
            continue;
        }
        let mut best: Option<(usize, Polarity)> = None;
        for class in Polarity::ALL {
            let k = counts[class.index()];
            // k / total >= threshold, compared without division.
            if k as f64 >= threshold * total as f64 - 1e-12 * total as f64 && k > 0 && best.is_none_or(|(b, _)| k > b) {
                best = Some((k, class));
            }
        }
        if let Some((_, class)) = best {
            markers.list_mut(class).insert(word.to_string());
        }
    }
    Ok(markers)
}

/// Linear SVR mapping a word vector to a real-valued polarity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct WordPolarityModel<T> {
    pub svr: SvrModel<T>,
    pub positive_words: usize,
    pub negative_words: usize,
}

impl<T: Scalar> WordPolarityModel<T> {
    /// SVR output for a raw vector.
    pub fn score_vector(&self, vector: &[T]) -> Result<T, SvmError> {
        self.svr.predict(vector)
    }

    /// Polarity of a word; 0 when the word has no vector.
    pub fn word_polarity(&self, word: &str, table: &EmbeddingTable<T>) -> T {
        table
            .get(word)
            .and_then(|v| self.svr.predict(v).ok())
            .unwrap_or_else(T::zero)
    }
}

pub fn train_polarity_predictor<T: Scalar>(
    lexicon: &Lexicon,
    table: &EmbeddingTable<T>,
    config: &SvrConfig,
) -> Result<WordPolarityModel<T>, LexiconError> {
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    let mut counts = [0usize; 2];
    for (words, target, slot) in [(&lexicon.positive, T::one(), 0), (&lexicon.negative, -T::one(), 1)] {
        for w in words {
            if let Some(v) = table.get(w) {
                rows.push(v.to_vec());
                targets.push(target);
                counts[slot] += 1;
            }
        }
    }
    if counts[0] == 0 || counts[1] == 0 {
        return Err(LexiconError::InsufficientData { positive: counts[0], negative: counts[1] });
    }
    let svr = train_svr(&rows, &targets, config)?;
    Ok(WordPolarityModel { svr, positive_words: counts[0], negative_words: counts[1] })
}

pub fn word_polarity<T: Scalar>(model: &WordPolarityModel<T>, word: &str, table: &EmbeddingTable<T>) -> T {
    model.word_polarity(word, table)
}
