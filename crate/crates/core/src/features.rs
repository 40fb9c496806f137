//! Feature vectors for the SVM classifiers.
//!
//! The tweet-level vector (`extract_task1`) is laid out as
//!
//! ```text
//! [ centroid (d) | top-9 word polarities | lexicon counts (pos, neg)
//!   | near-centroid counts (pos, neg) | marker counts (P, N, NEU, NONE)
//!   | surface flags (repetition, all-caps) | tentative polarity one-hot
//!   | top-5 bag-of-words ]
//! ```
//!
//! for `d + 28` components, 328 with 300-dimensional embeddings. The
//! aspect-level vectors are `extract_svm1` (bag of words, flags, marker
//! counts, aspect) and `extract_svm2` (centroid, aspect).

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embeddings::{cosine, EmbeddingTable};
use crate::lexicon::{parse_word_list, Lexicon, MarkerLists, WordPolarityModel};
use crate::polarity::{Polarity, NUM_CLASSES};
use crate::preprocess::{is_punctuation_token, is_word_token, AspectTweet, TokenizedTweet};
use crate::scalar::Scalar;

pub const TOP_WORDS: usize = 9;
pub const BOW_SIZE: usize = 5;
pub const DEFAULT_NEAR_THRESHOLD: f64 = 0.5;
/// Components after the centroid.
pub const TASK1_EXTRA: usize = TOP_WORDS + 2 + 2 + NUM_CLASSES + 2 + NUM_CLASSES + BOW_SIZE;

/// Offsets of each block in the task-1 vector for embedding dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Task1Layout {
    pub centroid: usize,
    pub top_words: usize,
    pub lexicon: usize,
    pub near: usize,
    pub markers: usize,
    pub flags: usize,
    pub tentative: usize,
    pub bow: usize,
    pub dimension: usize,
}

impl Task1Layout {
    pub fn new(d: usize) -> Self {
        let top_words = d;
        let lexicon = top_words + TOP_WORDS;
        let near = lexicon + 2;
        let markers = near + 2;
        let flags = markers + NUM_CLASSES;
        let tentative = flags + 2;
        let bow = tentative + NUM_CLASSES;
        Task1Layout { centroid: 0, top_words, lexicon, near, markers, flags, tentative, bow, dimension: bow + BOW_SIZE }
    }
}

static DEFAULT_STOPWORDS: LazyLock<BTreeSet<String>> =
    LazyLock::new(|| parse_word_list(include_str!("../resources/stopwords_es.txt")));
static DEFAULT_NEGATORS: LazyLock<BTreeSet<String>> =
    LazyLock::new(|| parse_word_list(include_str!("../resources/negators_es.txt")));

/// Built-in Spanish stopword list ("no", "pero" and "aunque" are kept out).
pub fn default_stopwords() -> BTreeSet<String> {
    DEFAULT_STOPWORDS.clone()
}

pub fn default_negators() -> BTreeSet<String> {
    DEFAULT_NEGATORS.clone()
}

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("no words left after stopword filtering")]
    EmptyVocabulary,
    #[error("embedding dimension {found} does not match resources ({expected})")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("near-centroid threshold must be in [-1, 1], got {0}")]
    BadThreshold(f64),
}

/// Ranked words for the bag-of-words block. Holds at most `slots` words;
/// unused slots are always 0 in the feature vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BowVocabulary {
    pub slots: usize,
    pub words: Vec<String>,
}

impl BowVocabulary {
    pub fn indicators<T: Scalar>(&self, tokens: &[String]) -> Vec<T> {
        let present: HashSet<&str> = tokens.iter().map(String::as_str).collect();
        let mut out = vec![T::zero(); self.slots];
        for (slot, w) in out.iter_mut().zip(&self.words) {
            if present.contains(w.as_str()) {
                *slot = T::one();
            }
        }
        out
    }
}

fn document_frequencies<'a, I>(docs: I, stopwords: &BTreeSet<String>) -> BTreeMap<&'a str, usize>
where
    I: IntoIterator<Item = &'a TokenizedTweet>,
{
    let mut df = BTreeMap::new();
    for doc in docs {
        let distinct: HashSet<&str> = doc
            .tokens
            .iter()
            .map(String::as_str)
            .filter(|t| is_word_token(t) && !stopwords.contains(*t))
            .collect();
        for w in distinct {
            *df.entry(w).or_insert(0) += 1;
        }
    }
    df
}

/// The `k` non-stopword words found in the most tweets, ties broken
/// lexicographically.
pub fn top_k_relevant_words<'a, I>(docs: I, stopwords: &BTreeSet<String>, k: usize) -> Result<BowVocabulary, FeatureError>
where
    I: IntoIterator<Item = &'a TokenizedTweet>,
{
    let df = document_frequencies(docs, stopwords);
    if df.is_empty() {
        return Err(FeatureError::EmptyVocabulary);
    }
    let mut ranked: Vec<(&str, usize)> = df.into_iter().collect();
    // BTreeMap order is lexicographic, and the sort is stable.
    ranked.sort_by_key(|&(_, n)| std::cmp::Reverse(n));
    Ok(BowVocabulary { slots: k, words: ranked.into_iter().take(k).map(|(w, _)| w.to_string()).collect() })
}

/// Sorted word list with binary-search lookup.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    words: Vec<String>,
}

impl Vocabulary {
    /// Non-stopword words with document frequency `>= min_df`.
    pub fn from_documents<'a, I>(docs: I, stopwords: &BTreeSet<String>, min_df: usize) -> Self
    where
        I: IntoIterator<Item = &'a TokenizedTweet>,
    {
        let words = document_frequencies(docs, stopwords)
            .into_iter()
            .filter(|&(_, n)| n >= min_df)
            .map(|(w, _)| w.to_string())
            .collect();
        Vocabulary { words }
    }

    pub fn position(&self, word: &str) -> Option<usize> {
        self.words.binary_search_by(|w| w.as_str().cmp(word)).ok()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Aspects seen in training; one-hot vectors carry a trailing slot for
/// anything else.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AspectInventory {
    aspects: Vec<String>,
}

impl AspectInventory {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(aspects: I) -> Self {
        let set: BTreeSet<String> = aspects.into_iter().map(Into::into).collect();
        AspectInventory { aspects: set.into_iter().collect() }
    }

    pub fn from_tweets(tweets: &[AspectTweet]) -> Self {
        Self::new(tweets.iter().map(|t| t.aspect.clone()))
    }

    pub fn aspects(&self) -> &[String] {
        &self.aspects
    }

    /// `len() + 1`, counting the unknown slot.
    pub fn width(&self) -> usize {
        self.aspects.len() + 1
    }

    pub fn slot(&self, aspect: &str) -> usize {
        self.aspects.binary_search_by(|a| a.as_str().cmp(aspect)).unwrap_or(self.aspects.len())
    }

    pub fn one_hot<T: Scalar>(&self, aspect: &str) -> Vec<T> {
        let mut v = vec![T::zero(); self.width()];
        v[self.slot(aspect)] = T::one();
        v
    }
}

/// Everything the task-1 extractor needs besides the embedding table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FeatureResources<T> {
    pub lexicon: Lexicon,
    pub markers: MarkerLists,
    pub polarity: WordPolarityModel<T>,
    pub negators: BTreeSet<String>,
    pub stopwords: BTreeSet<String>,
    pub bow: BowVocabulary,
    pub positive_centroid: Vec<T>,
    pub negative_centroid: Vec<T>,
    pub near_threshold: T,
}

/// Means of the in-vocabulary positive and negative lexicon vectors.
pub fn lexicon_centroids<T: Scalar>(lexicon: &Lexicon, table: &EmbeddingTable<T>) -> (Vec<T>, Vec<T>) {
    let pos: Vec<&String> = lexicon.positive().iter().collect();
    let neg: Vec<&String> = lexicon.negative().iter().collect();
    (table.centroid(&pos), table.centroid(&neg))
}

impl<T: Scalar> FeatureResources<T> {
    pub fn dimension(&self) -> usize {
        self.positive_centroid.len()
    }

    pub fn layout(&self) -> Task1Layout {
        Task1Layout::new(self.dimension())
    }

    pub fn check(&self, table: &EmbeddingTable<T>) -> Result<(), FeatureError> {
        let t = self.near_threshold.as_f64();
        if !(-1.0..=1.0).contains(&t) {
            return Err(FeatureError::BadThreshold(t));
        }
        for v in [&self.positive_centroid, &self.negative_centroid] {
            if v.len() != table.dimension() {
                return Err(FeatureError::DimensionMismatch { expected: v.len(), found: table.dimension() });
            }
        }
        Ok(())
    }
}

/// Word polarities of the in-vocabulary, non-stopword word tokens, the nine
/// largest by magnitude in descending order, cycled to fill nine slots.
pub fn top9_polarities<T: Scalar>(tokens: &[String], table: &EmbeddingTable<T>, resources: &FeatureResources<T>) -> [T; TOP_WORDS] {
    let mut scored: Vec<T> = tokens
        .iter()
        .filter(|t| is_word_token(t) && !resources.stopwords.contains(*t) && table.contains(t))
        .map(|t| resources.polarity.word_polarity(t, table))
        .collect();
    scored.sort_by(|a, b| b.abs().partial_cmp(&a.abs()).unwrap_or(std::cmp::Ordering::Equal));
    scored.truncate(TOP_WORDS);
    cycle_fill(&scored)
}

fn cycle_fill<T: Scalar>(values: &[T]) -> [T; TOP_WORDS] {
    let mut out = [T::zero(); TOP_WORDS];
    if !values.is_empty() {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = values[i % values.len()];
        }
    }
    out
}

/// Token occurrences in the positive and negative lexicons.
pub fn lexicon_counts<S: AsRef<str>>(tokens: &[S], lexicon: &Lexicon) -> (usize, usize) {
    tokens.iter().fold((0, 0), |(p, n), t| {
        let t = t.as_ref();
        (p + usize::from(lexicon.is_positive(t)), n + usize::from(lexicon.is_negative(t)))
    })
}

/// Token occurrences whose vector has cosine `>= threshold` with the
/// positive (resp. negative) lexicon centroid. Unknown tokens and empty
/// centroids never count.
pub fn near_centroid_counts<T: Scalar>(tokens: &[String], table: &EmbeddingTable<T>, resources: &FeatureResources<T>) -> (usize, usize) {
    let usable = |c: &[T]| c.iter().any(|v| *v != T::zero());
    let (use_pos, use_neg) = (usable(&resources.positive_centroid), usable(&resources.negative_centroid));
    let near = |v: &[T], c: &[T]| cosine(v, c).map(|s| s >= resources.near_threshold).unwrap_or(false);
    let mut counts = (0, 0);
    for v in tokens.iter().filter_map(|t| table.get(t)) {
        if use_pos && near(v, &resources.positive_centroid) {
            counts.0 += 1;
        }
        if use_neg && near(v, &resources.negative_centroid) {
            counts.1 += 1;
        }
    }
    counts
}

/// Lexicon-based guess with negation. A negator opens a scope that ends at
/// the next punctuation token; lexicon words inside a scope count for the
/// opposite polarity.
pub fn tentative_polarity<S: AsRef<str>>(tokens: &[S], lexicon: &Lexicon, negators: &BTreeSet<String>) -> Polarity {
    let (mut p, mut n) = (0usize, 0usize);
    let mut negated = false;
    for t in tokens {
        let t = t.as_ref();
        if is_punctuation_token(t) {
            negated = false;
        } else if negators.contains(t) {
            negated = true;
        } else {
            let (pos, neg) = (lexicon.is_positive(t), lexicon.is_negative(t));
            if (pos && !negated) || (neg && negated) {
                p += 1;
            } else if pos || neg {
                n += 1;
            }
        }
    }
    polarity_from_counts(p, n)
}

/// `p > n` → P, `n > p` → N, equal and non-zero → NEU, both zero → NONE.
pub fn polarity_from_counts(p: usize, n: usize) -> Polarity {
    match p.cmp(&n) {
        std::cmp::Ordering::Greater => Polarity::Positive,
        std::cmp::Ordering::Less => Polarity::Negative,
        std::cmp::Ordering::Equal if p > 0 => Polarity::Neutral,
        std::cmp::Ordering::Equal => Polarity::NoOpinion,
    }
}

fn count<T: Scalar>(n: usize) -> T {
    T::from_usize_lossy(n)
}

fn flag<T: Scalar>(b: bool) -> T {
    if b {
        T::one()
    } else {
        T::zero()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Task1Features<T> {
    pub centroid: Vec<T>,
    pub top9_polarities: [T; TOP_WORDS],
    pub lexicon_counts: (usize, usize),
    pub near_centroid_counts: (usize, usize),
    pub marker_counts: [usize; NUM_CLASSES],
    pub had_char_repetition: bool,
    pub had_all_caps_word: bool,
    pub tentative: Polarity,
    pub bow: Vec<T>,
}

impl<T: Scalar> Task1Features<T> {
    pub fn dimension(&self) -> usize {
        self.centroid.len() + TASK1_EXTRA - BOW_SIZE + self.bow.len()
    }

    pub fn to_vec(&self) -> Vec<T> {
        let mut v = Vec::with_capacity(self.dimension());
        v.extend_from_slice(&self.centroid);
        v.extend_from_slice(&self.top9_polarities);
        v.extend([self.lexicon_counts.0, self.lexicon_counts.1].map(count::<T>));
        v.extend([self.near_centroid_counts.0, self.near_centroid_counts.1].map(count::<T>));
        v.extend(self.marker_counts.map(count::<T>));
        v.extend([flag::<T>(self.had_char_repetition), flag(self.had_all_caps_word)]);
        v.extend(Polarity::ALL.map(|c| flag::<T>(c == self.tentative)));
        v.extend_from_slice(&self.bow);
        v
    }
}

pub fn extract_task1<T: Scalar>(tweet: &TokenizedTweet, table: &EmbeddingTable<T>, resources: &FeatureResources<T>) -> Task1Features<T> {
    let tokens = &tweet.tokens;
    Task1Features {
        centroid: table.centroid(tokens),
        top9_polarities: top9_polarities(tokens, table, resources),
        lexicon_counts: lexicon_counts(tokens, &resources.lexicon),
        near_centroid_counts: near_centroid_counts(tokens, table, resources),
        marker_counts: resources.markers.counts(tokens),
        had_char_repetition: tweet.had_char_repetition,
        had_all_caps_word: tweet.had_all_caps_word,
        tentative: tentative_polarity(tokens, &resources.lexicon, &resources.negators),
        bow: resources.bow.indicators(tokens),
    }
}

/// Resources for the bag-of-words aspect classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Svm1Resources {
    pub vocabulary: Vocabulary,
    pub markers: MarkerLists,
    pub aspects: AspectInventory,
}

impl Svm1Resources {
    pub fn dimension(&self) -> usize {
        self.vocabulary.len() + 2 + NUM_CLASSES + self.aspects.width()
    }
}

/// `[binary bag of words | flags | marker counts | aspect one-hot]`.
pub fn extract_svm1<T: Scalar>(tweet: &AspectTweet, resources: &Svm1Resources) -> Vec<T> {
    let mut bow = vec![T::zero(); resources.vocabulary.len()];
    for t in &tweet.tweet.tokens {
        if let Some(i) = resources.vocabulary.position(t) {
            bow[i] = T::one();
        }
    }
    let mut v = bow;
    v.extend([flag::<T>(tweet.tweet.had_char_repetition), flag(tweet.tweet.had_all_caps_word)]);
    v.extend(resources.markers.counts(&tweet.tweet.tokens).map(count::<T>));
    v.extend(resources.aspects.one_hot::<T>(&tweet.aspect));
    v
}

/// `[centroid | aspect one-hot]`.
pub fn extract_svm2<T: Scalar>(tweet: &AspectTweet, table: &EmbeddingTable<T>, aspects: &AspectInventory) -> Vec<T> {
    let mut v = table.centroid(&tweet.tweet.tokens);
    v.extend(aspects.one_hot::<T>(&tweet.aspect));
    v
}
