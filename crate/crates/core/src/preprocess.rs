//! Tweet normalization and tokenization.
//!
//! [`normalize`] applies five rewrite rules in a fixed order:
//!
//! 1. strip URLs (`http://`, `https://`, `www.` prefixes) and ellipses
//!    (`…` or two or more periods), then collapse whitespace runs;
//! 2. replace @-mentions with `@user`;
//! 3. collapse any letter repeated three or more times to one instance;
//! 4. replace laughter interjections (`jajaja`, `jejeje`, `JAJAJ`, ...) with
//!    `jaja`;
//! 5. lowercase.
//!
//! Surface flags (character repetition, all-caps words) are computed on the
//! original text since normalization erases both signals.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::{AspectRecord, LabeledCorpus, TweetRecord};
use crate::polarity::Polarity;

/// Punctuation marks emitted as standalone tokens. They also close
/// negation scopes.
pub const PUNCTUATION: [char; 8] = ['.', ',', ';', ':', '!', '?', '¡', '¿'];

pub const USER_TOKEN: &str = "@user";
pub const LAUGH_TOKEN: &str = "jaja";

static URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)(?:https?://|www\.)\S*").unwrap());
static ELLIPSIS: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"…|\.{2,}").unwrap());
static MENTION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"@[\p{L}\p{N}_]+").unwrap());
static LETTER_RUN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\p{L}+").unwrap());

fn same_letter(a: char, b: char) -> bool {
    a == b || a.to_lowercase().eq(b.to_lowercase())
}

/// Rule 3. Case-insensitive so that "AaA" does not survive as "aaa" after
/// lowercasing.
fn collapse_letter_runs(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let mut j = i + 1;
        if c.is_alphabetic() {
            while j < chars.len() && same_letter(c, chars[j]) {
                j += 1;
            }
        }
        if j - i >= 3 {
            out.push(c);
        } else {
            out.extend(&chars[i..j]);
        }
        i = j;
    }
    out
}

/// A laughter word uses only the letters j, a, e, i, o, u, with at least
/// two `j`s and two vowels.
pub fn is_laughter(word: &str) -> bool {
    let mut js = 0;
    let mut vowels = 0;
    for c in word.chars().flat_map(char::to_lowercase) {
        match c {
            'j' => js += 1,
            'a' | 'e' | 'i' | 'o' | 'u' => vowels += 1,
            _ => return false,
        }
    }
    js >= 2 && vowels >= 2
}

pub fn normalize(text: &str) -> String {
    let stripped = URL.replace_all(text, " ");
    let stripped = ELLIPSIS.replace_all(&stripped, " ");
    let spaced = stripped.split_whitespace().collect::<Vec<_>>().join(" ");
    let mentioned = MENTION.replace_all(&spaced, USER_TOKEN);
    let collapsed = collapse_letter_runs(&mentioned);
    let laughed = LETTER_RUN.replace_all(&collapsed, |caps: &regex::Captures<'_>| {
        if is_laughter(&caps[0]) {
            LAUGH_TOKEN.to_string()
        } else {
            caps[0].to_string()
        }
    });
    laughed.to_lowercase()
}

pub fn is_punctuation(c: char) -> bool {
    PUNCTUATION.contains(&c)
}

/// True for single-character punctuation tokens produced by [`tokenize`].
pub fn is_punctuation_token(token: &str) -> bool {
    let mut chars = token.chars();
    matches!((chars.next(), chars.next()), (Some(c), None) if is_punctuation(c))
}

/// Tokens that count as words for vocabulary statistics: they contain a
/// letter and are not user mentions.
pub fn is_word_token(token: &str) -> bool {
    !token.starts_with('@') && token.chars().any(char::is_alphabetic)
}

/// Whitespace split with punctuation marks peeled off as their own tokens.
pub fn tokenize(normalized: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in normalized.split_whitespace() {
        let mut current = String::new();
        for c in chunk.chars() {
            if is_punctuation(c) {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
                tokens.push(c.to_string());
            } else {
                current.push(c);
            }
        }
        if !current.is_empty() {
            tokens.push(current);
        }
    }
    tokens
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceFlags {
    pub had_char_repetition: bool,
    pub had_all_caps_word: bool,
}

/// Flags on the raw text. Repetition means any non-space character three
/// or more times in a row. A word is all-caps when, after trimming leading
/// and trailing non-alphanumerics, it has at least two characters and every
/// one is an uppercase letter.
pub fn surface_flags(original: &str) -> SurfaceFlags {
    let chars: Vec<char> = original.chars().collect();
    let had_char_repetition = chars
        .windows(3)
        .any(|w| !w[0].is_whitespace() && w[0] == w[1] && w[1] == w[2]);
    let had_all_caps_word = original.split_whitespace().any(|word| {
        let core = word.trim_matches(|c: char| !c.is_alphanumeric());
        core.chars().count() >= 2 && core.chars().all(char::is_uppercase)
    });
    SurfaceFlags { had_char_repetition, had_all_caps_word }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedTweet {
    pub tokens: Vec<String>,
    pub had_char_repetition: bool,
    pub had_all_caps_word: bool,
    pub original: String,
}

impl TokenizedTweet {
    pub fn flags(&self) -> SurfaceFlags {
        SurfaceFlags { had_char_repetition: self.had_char_repetition, had_all_caps_word: self.had_all_caps_word }
    }
}

/// Normalize, tokenize and flag one tweet.
pub fn analyze(text: &str) -> TokenizedTweet {
    let flags = surface_flags(text);
    TokenizedTweet {
        tokens: tokenize(&normalize(text)),
        had_char_repetition: flags.had_char_repetition,
        had_all_caps_word: flags.had_all_caps_word,
        original: text.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTweet {
    pub id: String,
    pub label: Polarity,
    pub tweet: TokenizedTweet,
}

impl LabeledTweet {
    pub fn from_record(record: &TweetRecord) -> Self {
        LabeledTweet { id: record.id.clone(), label: record.label, tweet: analyze(&record.text) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AspectTweet {
    pub id: String,
    pub label: Polarity,
    pub aspect: String,
    pub tweet: TokenizedTweet,
}

impl AspectTweet {
    pub fn from_record(record: &AspectRecord) -> Self {
        AspectTweet {
            id: record.id.clone(),
            label: record.label,
            aspect: record.aspect.clone(),
            tweet: analyze(&record.text),
        }
    }
}

pub fn analyze_corpus(corpus: &LabeledCorpus) -> Vec<LabeledTweet> {
    corpus.records.iter().map(LabeledTweet::from_record).collect()
}
